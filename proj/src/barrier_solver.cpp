#include "divopt/barrier_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "divopt/errors.hpp"
#include "divopt/root_finding.hpp"
#include "divopt/value_functions.hpp"

namespace divopt {

std::string regime_label(Regime r) {
    switch (r) {
        case Regime::ProfitablePeriodic: return "periodic";
        case Regime::ProfitableHybrid: return "hybrid";
        case Regime::UnprofitablePeriodicZero: return "periodic_zero";
        case Regime::UnprofitableLiquidationFinite: return "liquidation_finite";
        case Regime::UnprofitableLiquidationHalf: return "liquidation_half";
    }
    return "unknown";
}

Regime classify_regime(const ModelParams& p, const Roots& r) {
    const double pp = r.pvfactor;
    if (p.mu >= 0) return p.beta <= pp ? Regime::ProfitablePeriodic : Regime::ProfitableHybrid;
    if (p.chi >= p.beta * (-r.m)) {
        return p.beta <= pp ? Regime::UnprofitablePeriodicZero : Regime::UnprofitableLiquidationHalf;
    }
    if (p.beta >= pp) return Regime::UnprofitableLiquidationHalf;
    return p.beta <= beta0(p, r) ? Regime::UnprofitablePeriodicZero
                                 : Regime::UnprofitableLiquidationFinite;
}

double Q_function(const ModelParams& p, const Roots& r, double a) {
    return 1.0 - (f(r, a) / f_d1(r, a)) / (p.mu / p.delta);
}

double K_function(const Roots& r, double q) {
    return -r.s1 * r.pvfactor / (-r.s1 + q * (r.r1 + r.s1));
}

double I_function(const ModelParams& p, const Roots& r, double x, double q) {
    const double num = r.alpha + (r.pvfactor - K_function(r, q)) * std::exp(r.s1 * x);
    const double den = g_d1(r, x) + g(r, x) * (-r.r1 * r.s1) * r.m * (1.0 - q);
    (void)p;
    return num / den;
}

double periodic_b0(const ModelParams& p, const Roots& r) {
    if ((-r.s1 / r.r1) * r.pvfactor <= 1.0 || r.a_bar <= 0) return 0.0;
    const double q_star = r.s1 * r.w / (r.r1 + r.s1);
    return bisect([&](double a) { return Q_function(p, r, a) - q_star; }, 0.0, r.a_bar, 1e-15);
}

double a_beta(const ModelParams& p, const Roots& r, double beta_prime) {
    const double ratio = (r.pvfactor - beta_prime) / (r.kappa * r.s1);
    if (!(p.mu < 0) || !(ratio > 0) || !(ratio <= 1.0)) {
        std::ostringstream os;
        os << "a_beta undefined for beta' = " << beta_prime;
        throw OutOfRange(os.str());
    }
    return std::log(ratio) / r.s1;
}

double Lambda(const ModelParams& p, const Roots& r, double beta_prime) {
    const double a = a_beta(p, r, beta_prime);
    return a - periodic_zero_value(r, a) / beta_prime;
}

namespace {
double v0_d1_at_zero(const Roots& r) { return r.pvfactor - r.kappa * r.s1; }

double Lambda_inverse(const ModelParams& p, const Roots& r, double target) {
    const double lo = v0_d1_at_zero(r);
    const double hi = r.pvfactor * (1.0 - 1e-14);
    if (target <= 0) return lo;
    auto fn = [&](double b) { return Lambda(p, r, b) - target; };
    if (fn(hi) < 0) throw OutOfRange("Lambda does not reach the requested level");
    return brent(fn, lo, hi, RootTol{1e-15, 0.0, 400}).x;
}
}  // namespace

double beta0(const ModelParams& p, const Roots& r) {
    if (!(p.mu < 0)) throw OutOfRange("beta0 is defined for mu < 0 only");
    const double target = p.chi / p.beta;
    if (target >= -r.m) throw OutOfRange("chi/beta >= -mu/(gamma+delta): Lambda never reaches it");
    return Lambda_inverse(p, r, target);
}

double beta0_boundary(const ModelParams& p) {
    if (!(p.mu < 0)) throw OutOfRange("beta0 is defined for mu < 0 only");
    // Lambda does not depend on beta, only on its argument
    const Roots r = solve_roots(p);
    if (p.chi >= r.pvfactor * (-r.m)) throw OutOfRange("no liquidation-finite band: chi too large");
    const double lo = v0_d1_at_zero(r);
    if (p.chi == 0) return lo;
    const double hi = r.pvfactor * (1.0 - 1e-14);
    auto fn = [&](double b) { return Lambda(p, r, b) - p.chi / b; };
    return brent(fn, lo, hi, RootTol{1e-15, 0.0, 400}).x;
}

double c_beta_chi(const ModelParams& p, const Roots& r) {
    const double ab = a_beta(p, r, p.beta);
    auto fn = [&](double x) { return periodic_zero_value(r, x) - p.beta * x + p.chi; };
    if (p.chi == 0) return 0.0;
    if (!(fn(ab) < 0)) throw OutOfRange("c_{beta,chi} does not exist (no finite liquidation band)");
    return brent(fn, 0.0, ab, RootTol{1e-15, 0.0, 400}).x;
}

Hints sufficient_condition_hints(const ModelParams& p, const Roots& r) {
    Hints h;
    h.ratio = (-r.s1 / r.r1) * r.pvfactor;
    h.predict_ap_zero = h.ratio <= 1.0;
    h.predict_ac_zero = h.ratio <= p.beta;
    h.nu = (p.mu != 0) ? (p.sigma / p.mu) * (p.sigma / p.mu) * (p.gamma + p.delta)
                       : std::numeric_limits<double>::infinity();
    return h;
}

AuxiliaryQuantities auxiliary_quantities(const ModelParams& p, const Roots& r) {
    AuxiliaryQuantities q;
    q.nu = sufficient_condition_hints(p, r).nu;
    if (p.mu > 0) {
        q.q_star = r.s1 * r.w / (r.r1 + r.s1);
        q.b0 = periodic_b0(p, r);
    } else if (p.mu == 0) {
        q.b0 = 0;
    } else {
        try { q.a_beta = a_beta(p, r, p.beta); } catch (const OutOfRange&) {}
        try { q.c_beta_chi = c_beta_chi(p, r); } catch (const Error&) {}
        try { q.beta0 = beta0(p, r); } catch (const OutOfRange&) {}
        try { q.Lambda_beta = Lambda(p, r, p.beta); } catch (const OutOfRange&) {}
    }
    return q;
}

double SolveReport::max_residual() const {
    double m = 0;
    for (const auto& x : residuals) m = std::max(m, std::abs(x.value));
    return m;
}

// ---------------------------------------------------------------- hybrid

namespace {

struct HybridSearch {
    const ModelParams& p;
    const Roots& r;
    const SolveOptions& o;
    long evals = 0;

    HybridCoefficients coef(double a, double l, double y) {
        ++evals;
        return hybrid_coefficients(p, r, a, a + l, a + l + y);
    }

    // V' on [a, b) at u = x - a, d = b - a
    double vmid_d1(const HybridCoefficients& c, double d, double u) const {
        return c.A_scaled * r.r1 * std::exp(r.r1 * (u - d)) +
               (c.B - c.A) * r.s1 * std::exp(r.s1 * u) + r.pvfactor;
    }

    double fit_b(double a, double l, double y) {
        const auto c = coef(a, l, y);
        return vmid_d1(c, l + y, l + y) - p.beta;
    }

    // y with V'(b-) = beta for fixed (a, l)
    double ystar(double a, double l) {
        auto fn = [&](double y) { return fit_b(a, l, y); };
        const double floor_y = p.chi / p.beta;
        double lo = p.chi > 0 ? p.chi / r.alpha : 1e-9;
        double flo = fn(lo);
        if (flo >= 0) {
            // walk down toward chi/beta until the residual turns negative
            double hi = lo, fhi = flo;
            bool found = false;
            for (int k = 0; k < 80; ++k) {
                double cand = p.chi > 0 ? floor_y + 0.5 * (hi - floor_y) : 0.5 * hi;
                double fc = fn(cand);
                if (fc < 0) { lo = cand; flo = fc; found = true; break; }
                hi = cand;
                fhi = fc;
            }
            if (!found) throw NoBracket("V'(b-) - beta has no negative value above chi/beta");
            return brent(fn, lo, hi, flo, fhi, RootTol{1e-15, 0.0, 300}).x;
        }
        const auto br = expand_right(fn, lo, (lo + 0.01) * o.window, 2.0, o.max_expand);
        return brent(fn, br.lo, br.hi, br.flo, br.fhi, RootTol{1e-15, 0.0, 300}).x;
    }

    double fit_ap(double a, double l) {
        const double y = ystar(a, l);
        return coef(a, l, y).C * f_d1(r, a) - 1.0;
    }

    double a_of(double l) {
        if (r.a_bar <= 0) return 0.0;
        const double h0 = fit_ap(0.0, l);
        if (h0 <= 0) return 0.0;
        const double hb = fit_ap(r.a_bar, l);
        if (hb >= 0) throw NoBracket("V'(a) - 1 does not change sign on [0, a_bar]");
        return brent([&](double a) { return fit_ap(a, l); }, 0.0, r.a_bar, h0, hb,
                     RootTol{1e-15, 0.0, 300})
            .x;
    }

    double fit_ac(double l) {
        const double a = a_of(l);
        const double y = ystar(a, l);
        const auto c = coef(a, l, y);
        return vmid_d1(c, l + y, l) - p.beta;
    }
};

SolveReport asymptotic_report(const ModelParams& p, const Roots& r, const std::string& why) {
    SolveReport rep;
    rep.regime = Regime::ProfitableHybrid;
    rep.asymptotic = true;
    rep.a_p = periodic_b0(p, r);
    const double q = rep.a_p > 0 ? r.s1 * r.w / (r.r1 + r.s1) : 1.0;
    const double K = K_function(r, q);
    // gap where the numerator of I(., q) vanishes
    double l = 0;
    if (K - r.pvfactor > r.alpha) l = std::log(r.alpha / (K - r.pvfactor)) / r.s1;
    rep.a_c = rep.a_p + l;
    rep.b = kInf;
    rep.ap_zero = rep.a_p == 0;
    rep.ac_eq_ap = l == 0;
    rep.strategy = PeriodicBarrier{rep.a_p};
    rep.note = "asymptotic decomposition (b treated as infinite): " + why;
    const ValueFunction vf(p, r, rep.strategy);
    if (rep.a_p > 0)
        rep.residuals.push_back({"V'(a_p)-1", vf.d1(rep.a_p, Side::Left) - 1.0, false});
    else
        rep.residuals.push_back({"V'(0)-1", std::max(0.0, vf.d1(0.0, Side::Right) - 1.0), true});
    return rep;
}

}  // namespace

SolveReport solve_hybrid(const ModelParams& p, const Roots& r, const SolveOptions& o) {
    if (!(p.mu >= 0) || !(r.alpha > 0)) throw InvalidParameter("solve_hybrid needs mu >= 0 and beta > gamma/(gamma+delta)");
    HybridSearch hs{p, r, o};
    SolveReport rep;
    rep.regime = Regime::ProfitableHybrid;
    double a = 0, l = 0, y = 0;
    try {
        if (p.mu == 0) {
            // the (0, 0, b) form is optimal here
            y = hs.ystar(0.0, 0.0);
        } else {
            const double k0 = hs.fit_ac(0.0);
            if (k0 > 0) {
                auto fn = [&](double ll) { return hs.fit_ac(ll); };
                const auto br = expand_right(fn, 0.0, 0.1 * o.window, 2.0, o.max_expand);
                l = brent(fn, br.lo, br.hi, br.flo, br.fhi, RootTol{o.xtol, 0.0, 300}).x;
            }
            a = hs.a_of(l);
            y = hs.ystar(a, l);
        }
    } catch (const Error& e) {
        if (!o.allow_asymptotic || p.mu == 0) throw;
        auto rep2 = asymptotic_report(p, r, e.what());
        rep2.evaluations = hs.evals;
        return rep2;
    }
    rep.evaluations = hs.evals;
    rep.a_p = a;
    rep.a_c = a + l;
    rep.b = a + l + y;
    rep.ap_zero = a == 0;
    rep.ac_eq_ap = l == 0;
    rep.strategy = Hybrid{rep.a_p, rep.a_c, rep.b};

    // residuals re-evaluated from the final value function only
    const ValueFunction vf(p, r, rep.strategy);
    if (a > 0)
        rep.residuals.push_back({"V'(a_p)-1", vf.d1(a, Side::Right) - 1.0, false});
    else
        rep.residuals.push_back({"V'(0)-1", std::max(0.0, vf.d1(0.0, Side::Right) - 1.0), true});
    if (l > 0)
        rep.residuals.push_back({"V'(a_c)-beta", vf.d1(rep.a_c, Side::Right) - p.beta, false});
    else
        rep.residuals.push_back({"V'(a_c)-beta", std::max(0.0, vf.d1(rep.a_c, Side::Right) - p.beta), true});
    rep.residuals.push_back({"V'(b-)-beta", vf.d1(rep.b, Side::Left) - p.beta, false});
    return rep;
}

SolveReport solve_periodic(const ModelParams& p, const Roots& r, const SolveOptions&) {
    SolveReport rep;
    rep.regime = Regime::ProfitablePeriodic;
    rep.b0 = periodic_b0(p, r);
    rep.strategy = PeriodicBarrier{rep.b0};
    rep.ap_zero = rep.b0 == 0;
    const ValueFunction vf(p, r, rep.strategy);
    if (rep.b0 > 0)
        rep.residuals.push_back({"V'(b0)-1", vf.d1(rep.b0, Side::Left) - 1.0, false});
    else
        rep.residuals.push_back({"V'(0)-1", std::max(0.0, vf.d1(0.0, Side::Right) - 1.0), true});
    return rep;
}

// ----------------------------------------------------------- liquidation

double liquidation_smooth_fit(const ModelParams& p, const Roots& r, double b) {
    const double num = r.alpha * b - p.chi + r.kappa * std::expm1(r.s1 * b);
    const double e = std::exp((r.s1 - r.r1) * b);
    const double gp_over_g = (r.r1 - r.s1 * e) / -std::expm1((r.s1 - r.r1) * b);
    return num * gp_over_g + periodic_zero_d1(r, b) - p.beta;
}

namespace {

// first sign change of fn to the right of lo, step growing by `growth`
Bracket scan_growing(const Fn& fn, double lo, double step, double growth, double hi_limit,
                     int max_steps) {
    double x0 = lo, f0 = fn(lo);
    for (int k = 0; k < max_steps && x0 < hi_limit; ++k) {
        double x1 = std::min(hi_limit, x0 + step);
        double f1 = fn(x1);
        if ((f0 < 0) != (f1 < 0) || f1 == 0) return {x0, x1, f0, f1};
        x0 = x1;
        f0 = f1;
        step *= growth;
    }
    throw NoBracket("scan found no sign change");
}

}  // namespace

SolveReport solve_unprofitable(const ModelParams& p, const Roots& r, const SolveOptions& o) {
    if (!(p.mu < 0)) throw InvalidParameter("solve_unprofitable needs mu < 0");
    SolveReport rep;
    rep.regime = classify_regime(p, r);
    if (rep.regime == Regime::UnprofitablePeriodicZero) {
        rep.strategy = PeriodicZero{};
        return rep;
    }
    auto fit = [&](double b) {
        ++rep.evaluations;
        return liquidation_smooth_fit(p, r, b);
    };
    if (rep.regime == Regime::UnprofitableLiquidationFinite) {
        const double ab = a_beta(p, r, p.beta);
        const double c = c_beta_chi(p, r);
        double step = (ab - c) / 200.0;
        if (p.chi > 0) step = std::min(step, p.chi / p.beta / 10.0);
        const auto br = scan_growing(fit, c, step * o.window, 1.0, ab, 1000000);
        rep.b1 = brent(fit, br.lo, br.hi, br.flo, br.fhi, RootTol{1e-15, 0.0, 300}).x;
        rep.b2 = (p.chi * r.s1 + r.s1 * r.kappa - (r.pvfactor - p.beta)) / (r.s1 * r.alpha);
        rep.strategy = Liquidation{rep.b1, rep.b2};
        const ValueFunction vf(p, r, rep.strategy);
        rep.residuals.push_back({"V'(b1-)-beta", vf.d1(rep.b1, Side::Left) - p.beta, false});
        rep.residuals.push_back({"V'(b2+)-beta", vf.d1(rep.b2, Side::Right) - p.beta, false});
        return rep;
    }
    // (b, inf)
    const double lo = p.chi > 0 ? p.chi / p.beta : 1e-12;
    const double step = (p.chi > 0 ? p.chi / p.beta / 10.0 : 1e-3 / r.r1) * o.window;
    const auto br = scan_growing(fit, lo, step, 1.05, kInf, 5000);
    rep.b1 = brent(fit, br.lo, br.hi, br.flo, br.fhi, RootTol{1e-15, 0.0, 300}).x;
    rep.b = rep.b1;
    rep.b2 = kInf;
    rep.strategy = Liquidation{rep.b1, kInf};
    const ValueFunction vf(p, r, rep.strategy);
    rep.residuals.push_back({"V'(b-)-beta", vf.d1(rep.b1, Side::Left) - p.beta, false});
    return rep;
}

SolveReport solve(const ModelParams& p, const SolveOptions& o) {
    p.validate();
    const Roots r = solve_roots(p);
    switch (classify_regime(p, r)) {
        case Regime::ProfitablePeriodic: return solve_periodic(p, r, o);
        case Regime::ProfitableHybrid: {
            auto rep = solve_hybrid(p, r, o);
            rep.b0 = p.mu > 0 ? periodic_b0(p, r) : 0.0;
            return rep;
        }
        default: return solve_unprofitable(p, r, o);
    }
}

}  // namespace divopt
