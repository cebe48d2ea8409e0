#include "divopt/strategy.hpp"

#include <cmath>
#include <sstream>

#include "divopt/errors.hpp"

namespace divopt {

namespace {
template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void reject(const std::string& msg) { throw InvalidParameter(msg); }
}  // namespace

void validate_strategy(const ModelParams& p, const Strategy& s) {
    std::visit(overloaded{
                   [](const PeriodicBarrier& x) {
                       if (!(x.b >= 0) || !std::isfinite(x.b)) reject("periodic barrier b must be >= 0");
                   },
                   [&](const Hybrid& h) {
                       if (!(h.a_p >= 0)) reject("hybrid: a_p must be >= 0");
                       if (!(h.a_c >= h.a_p)) reject("hybrid: a_c must be >= a_p");
                       if (!(h.b > h.a_c + p.chi / p.beta) || !std::isfinite(h.b))
                           reject("hybrid: b must exceed a_c + chi/beta");
                   },
                   [](const Liquidation& l) {
                       if (!(l.b1 > 0) || !std::isfinite(l.b1)) reject("liquidation: b1 must be > 0");
                       if (!(l.b2 > l.b1)) reject("liquidation: b2 must exceed b1");
                   },
                   [](const PeriodicZero&) {},
               },
               s);
}

std::string strategy_name(const Strategy& s) {
    return std::visit(overloaded{
                          [](const PeriodicBarrier&) { return std::string("periodic"); },
                          [](const Hybrid&) { return std::string("hybrid"); },
                          [](const Liquidation& l) {
                              return std::string(l.half() ? "liquidation_half" : "liquidation_finite");
                          },
                          [](const PeriodicZero&) { return std::string("periodic_zero"); },
                      },
                      s);
}

std::string describe(const Strategy& s) {
    std::ostringstream os;
    os.precision(12);
    std::visit(overloaded{
                   [&](const PeriodicBarrier& x) { os << "periodic(b=" << x.b << ")"; },
                   [&](const Hybrid& h) {
                       os << "hybrid(a_p=" << h.a_p << ", a_c=" << h.a_c << ", b=" << h.b << ")";
                   },
                   [&](const Liquidation& l) {
                       os << "liquidation(b1=" << l.b1 << ", b2=";
                       if (l.half()) os << "inf"; else os << l.b2;
                       os << ")";
                   },
                   [&](const PeriodicZero&) { os << "periodic_zero"; },
               },
               s);
    return os.str();
}

}  // namespace divopt
