#pragma once

#include <vector>

#include "divopt/core_math.hpp"
#include "divopt/strategy.hpp"

namespace divopt {

// Coefficients of the hybrid value function. A is also kept pre-multiplied by
// e^{r1 (b - a)} because A itself is tiny whenever r1 (b - a) is large, and the
// exponential it multiplies is huge.
struct HybridCoefficients {
    double A = 0, B = 0, C = 0;
    double A_scaled = 0;  // A * exp(r1 * (b - a))
    double Va = 0;        // V(a) = C f(a)
    double A_tilde() const { return A; }
    double B_tilde() const { return B - A; }
};

// throws InvalidParameter on a bad barrier triple, DegenerateDenominator if
// the C denominator vanishes
HybridCoefficients hybrid_coefficients(const ModelParams& p, const Roots& r, double a,
                                       double a_c, double b);

// the l -> inf limit: A = 0, C from the limiting quotient
HybridCoefficients periodic_barrier_coefficients(const ModelParams& p, const Roots& r, double b);

struct LiquidationCoefficients {
    double A = 0;
    double B_at_b2 = 0;  // B e^{s1 b2}; unused when b2 = inf
    bool has_B = false;
};

double liquidation_A(const ModelParams& p, const Roots& r, double b1);
LiquidationCoefficients liquidation_coefficients(const ModelParams& p, const Roots& r,
                                                 double b1, double b2);

// closed form for the liquidate-at-first-decision-time strategy
double periodic_zero_value(const Roots& r, double x);
double periodic_zero_d1(const Roots& r, double x);
double periodic_zero_d2(const Roots& r, double x);

enum class Side { Left, Right };

// Piecewise evaluator, built once per strategy.
class ValueFunction {
public:
    ValueFunction(const ModelParams& p, const Roots& r, const Strategy& s);

    double value(double x) const;
    double d1(double x, Side side = Side::Left) const;
    double d2(double x, Side side = Side::Left) const;

    // points where V is not twice differentiable (excluding 0)
    std::vector<double> kinks() const;
    const Strategy& strategy() const { return s_; }
    const HybridCoefficients& coefficients() const { return hc_; }
    const LiquidationCoefficients& liquidation() const { return lc_; }

private:
    enum class Kind { Barrier, Liquidation };
    // which piece x falls in; 0 = [0, lo), 1 = [lo, hi), 2 = [hi, inf)
    int piece(double x, Side side) const;
    double mid(double u, int deriv) const;
    double liq_low(double x, int deriv) const;

    ModelParams p_;
    Roots r_;
    Strategy s_;
    Kind kind_ = Kind::Barrier;
    // Barrier kind covers hybrid, periodic barrier and periodic zero:
    // C f on [0, a), the exponential/linear piece on [a, b), linear above b.
    double a_ = 0, ac_ = 0, b_ = kInf, d_ = kInf;
    double Vac_ = 0;
    HybridCoefficients hc_;
    // Liquidation
    double b1_ = 0, b2_ = kInf;
    LiquidationCoefficients lc_;
    double liq_num_ = 0;  // A(b1) g(b1)
};

double value(const ModelParams& p, const Roots& r, const Strategy& s, double x);
double value_d1(const ModelParams& p, const Roots& r, const Strategy& s, double x,
                Side side = Side::Left);
double value_d2(const ModelParams& p, const Roots& r, const Strategy& s, double x,
                Side side = Side::Left);

}  // namespace divopt
