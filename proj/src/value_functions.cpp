#include "divopt/value_functions.hpp"

#include <cmath>
#include <sstream>

#include "divopt/errors.hpp"

namespace divopt {

HybridCoefficients hybrid_coefficients(const ModelParams& p, const Roots& r, double a,
                                       double a_c, double b) {
    if (!(a >= 0) || !(a_c >= a) || !(b > a_c + p.chi / p.beta) || !std::isfinite(b)) {
        std::ostringstream os;
        os << "hybrid coefficients need 0 <= a <= a_c and b > a_c + chi/beta (a=" << a
           << ", a_c=" << a_c << ", b=" << b << ")";
        throw InvalidParameter(os.str());
    }
    const double r1 = r.r1, s1 = r.s1;
    const double pp = r.pvfactor, w = r.w, kap = r.kappa;
    const double l = a_c - a, d = b - a, y = b - a_c;

    // everything below is multiplied through by e^{-r1 d}
    const double e1 = std::exp(-r1 * d);
    const double gd = -std::expm1((s1 - r1) * d);
    const double gl = std::exp(r1 * (l - d)) - std::exp(s1 * l - r1 * d);
    const double dg = gd - gl;
    const double des1 = std::exp(s1 * d) - std::exp(s1 * l);
    const double dJ = -s1 * dg + (r1 - s1) * des1 * e1;

    const double fa = f(r, a), f1a = f_d1(r, a);
    const double net = r.alpha * y - p.chi;
    const double N = (r1 - s1) * net * e1 + pp * dg + kap * dJ;
    const double D = w * fa * dJ + f1a * dg;
    if (!std::isfinite(D) || !(std::abs(D) > 1e-280)) {
        std::ostringstream os;
        os << "degenerate C denominator (" << D << ") at a=" << a << ", a_c=" << a_c << ", b=" << b;
        throw DegenerateDenominator(os.str());
    }

    HybridCoefficients c;
    c.C = N / D;
    c.B = w * c.C * fa - kap;
    // equal to (C f'(a) - B s1 - p)/(r1 - s1) but free of the cancellation
    c.A_scaled = (net * (f1a - s1 * w * fa) + (kap * f1a - pp * w * fa) * des1) / D;
    c.A = c.A_scaled * e1;
    c.Va = c.C * fa;
    return c;
}

HybridCoefficients periodic_barrier_coefficients(const ModelParams&, const Roots& r, double b) {
    const double fb = f(r, b), f1b = f_d1(r, b);
    const double D = r.w * fb - f1b / r.s1;
    if (!std::isfinite(D) || !(D > 0)) throw DegenerateDenominator("degenerate periodic-barrier denominator");
    HybridCoefficients c;
    c.C = (r.kappa - r.pvfactor / r.s1) / D;
    c.B = r.w * c.C * fb - r.kappa;
    c.A = c.A_scaled = 0;
    c.Va = c.C * fb;
    return c;
}

double liquidation_A(const ModelParams& p, const Roots& r, double b1) {
    if (!(b1 > 0)) throw InvalidParameter("liquidation_A needs b1 > 0");
    const double num = r.alpha * b1 - p.chi + r.kappa * std::expm1(r.s1 * b1);
    // 1/g(b1) written so that it underflows instead of overflowing
    const double inv_g = std::exp(-r.r1 * b1) / -std::expm1((r.s1 - r.r1) * b1);
    return num * inv_g;
}

LiquidationCoefficients liquidation_coefficients(const ModelParams& p, const Roots& r, double b1,
                                                 double b2) {
    if (!(b1 > 0) || !(b2 > b1)) throw InvalidParameter("liquidation needs 0 < b1 < b2");
    LiquidationCoefficients c;
    c.A = liquidation_A(p, r, b1);
    if (std::isfinite(b2)) {
        c.has_B = true;
        c.B_at_b2 = p.beta * b2 - p.chi - r.pvfactor * b2 - r.kappa;
    }
    return c;
}

double periodic_zero_value(const Roots& r, double x) {
    if (x < 0) return 0;
    return -r.kappa * std::exp(r.s1 * x) + r.pvfactor * (x + r.m);
}
double periodic_zero_d1(const Roots& r, double x) {
    if (x < 0) return 0;
    return r.pvfactor - r.kappa * r.s1 * std::exp(r.s1 * x);
}
double periodic_zero_d2(const Roots& r, double x) {
    if (x < 0) return 0;
    return -r.kappa * r.s1 * r.s1 * std::exp(r.s1 * x);
}

namespace {
template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

ValueFunction::ValueFunction(const ModelParams& p, const Roots& r, const Strategy& s)
    : p_(p), r_(r), s_(s) {
    std::visit(overloaded{
                   [&](const Hybrid& h) {
                       validate_strategy(p, s);
                       a_ = h.a_p;
                       ac_ = h.a_c;
                       b_ = h.b;
                       d_ = h.b - h.a_p;
                       hc_ = hybrid_coefficients(p, r, h.a_p, h.a_c, h.b);
                       Vac_ = mid(ac_ - a_, 0);
                   },
                   [&](const PeriodicBarrier& pb) {
                       validate_strategy(p, s);
                       a_ = pb.b;
                       hc_ = periodic_barrier_coefficients(p, r, pb.b);
                   },
                   [&](const PeriodicZero&) {
                       a_ = 0;
                       hc_.B = -r.kappa;
                   },
                   [&](const Liquidation& l) {
                       validate_strategy(p, s);
                       kind_ = Kind::Liquidation;
                       b1_ = l.b1;
                       b2_ = l.b2;
                       lc_ = liquidation_coefficients(p, r, l.b1, l.b2);
                       liq_num_ = r.alpha * l.b1 - p.chi + r.kappa * std::expm1(r.s1 * l.b1);
                   },
               },
               s);
}

int ValueFunction::piece(double x, Side side) const {
    const double lo = kind_ == Kind::Barrier ? a_ : b1_;
    const double hi = kind_ == Kind::Barrier ? b_ : b2_;
    if (side == Side::Left) {
        if (x <= lo && lo > 0) return 0;
        if (x <= hi) return 1;
        return 2;
    }
    if (x < lo) return 0;
    if (x < hi) return 1;
    return 2;
}

// [a, b) branch in the local variable u = x - a
double ValueFunction::mid(double u, int deriv) const {
    const double r1 = r_.r1, s1 = r_.s1;
    const double er = hc_.A_scaled == 0 ? 0.0 : std::exp(r1 * (u - d_));
    const double es = std::exp(s1 * u);
    const double Bt = hc_.B - hc_.A;
    switch (deriv) {
        case 0: return hc_.A_scaled * er + Bt * es + r_.pvfactor * (u + r_.m + hc_.Va);
        case 1: return hc_.A_scaled * r1 * er + Bt * s1 * es + r_.pvfactor;
        default: return hc_.A_scaled * r1 * r1 * er + Bt * s1 * s1 * es;
    }
}

// A g^{(k)}(x) on [0, b1) with A = num/g(b1), evaluated as a ratio
double ValueFunction::liq_low(double x, int deriv) const {
    const double r1 = r_.r1, s1 = r_.s1;
    const double den = -std::expm1((s1 - r1) * b1_);
    const double e_r = std::exp(r1 * (x - b1_));
    const double e_s = std::exp(s1 * x - r1 * b1_);
    double gk;
    switch (deriv) {
        case 0: gk = e_r - e_s; break;
        case 1: gk = r1 * e_r - s1 * e_s; break;
        default: gk = r1 * r1 * e_r - s1 * s1 * e_s; break;
    }
    return liq_num_ * gk / den;
}

double ValueFunction::value(double x) const {
    if (x < 0) return 0;
    const int k = piece(x, Side::Right);
    if (kind_ == Kind::Barrier) {
        if (k == 0) return hc_.C * f(r_, x);
        if (k == 1) return mid(x - a_, 0);
        return p_.beta * (x - ac_) - p_.chi + Vac_;
    }
    if (k == 0) return liq_low(x, 0) + periodic_zero_value(r_, x);
    if (k == 1) return p_.beta * x - p_.chi;
    return lc_.B_at_b2 * std::exp(r_.s1 * (x - b2_)) + r_.pvfactor * (x + r_.m);
}

double ValueFunction::d1(double x, Side side) const {
    if (x < 0) return 0;
    const int k = piece(x, side);
    if (kind_ == Kind::Barrier) {
        if (k == 0) return hc_.C * f_d1(r_, x);
        if (k == 1) return mid(x - a_, 1);
        return p_.beta;
    }
    if (k == 0) return liq_low(x, 1) + periodic_zero_d1(r_, x);
    if (k == 1) return p_.beta;
    return lc_.B_at_b2 * r_.s1 * std::exp(r_.s1 * (x - b2_)) + r_.pvfactor;
}

double ValueFunction::d2(double x, Side side) const {
    if (x < 0) return 0;
    const int k = piece(x, side);
    if (kind_ == Kind::Barrier) {
        if (k == 0) return hc_.C * f_d2(r_, x);
        if (k == 1) return mid(x - a_, 2);
        return 0;
    }
    if (k == 0) return liq_low(x, 2) + periodic_zero_d2(r_, x);
    if (k == 1) return 0;
    return lc_.B_at_b2 * r_.s1 * r_.s1 * std::exp(r_.s1 * (x - b2_));
}

std::vector<double> ValueFunction::kinks() const {
    std::vector<double> out;
    if (kind_ == Kind::Barrier) {
        if (a_ > 0) out.push_back(a_);
        if (std::isfinite(b_)) out.push_back(b_);
    } else {
        out.push_back(b1_);
        if (std::isfinite(b2_)) out.push_back(b2_);
    }
    return out;
}

double value(const ModelParams& p, const Roots& r, const Strategy& s, double x) {
    return ValueFunction(p, r, s).value(x);
}
double value_d1(const ModelParams& p, const Roots& r, const Strategy& s, double x, Side side) {
    return ValueFunction(p, r, s).d1(x, side);
}
double value_d2(const ModelParams& p, const Roots& r, const Strategy& s, double x, Side side) {
    return ValueFunction(p, r, s).d2(x, side);
}

}  // namespace divopt
