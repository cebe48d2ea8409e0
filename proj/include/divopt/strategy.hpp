#pragma once

#include <limits>
#include <string>
#include <variant>

#include "divopt/core_math.hpp"

namespace divopt {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PeriodicBarrier {
    double b = 0;
};

struct Hybrid {
    double a_p = 0, a_c = 0, b = 0;
};

// b2 == kInf marks the (b, inf) liquidation
struct Liquidation {
    double b1 = 0, b2 = kInf;
    bool half() const { return b2 == kInf; }
};

struct PeriodicZero {};

using Strategy = std::variant<PeriodicBarrier, Hybrid, Liquidation, PeriodicZero>;

// throws InvalidParameter when the family invariants fail
void validate_strategy(const ModelParams& p, const Strategy& s);

std::string strategy_name(const Strategy& s);
std::string describe(const Strategy& s);

}  // namespace divopt
