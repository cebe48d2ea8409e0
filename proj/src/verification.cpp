#include "divopt/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "divopt/errors.hpp"
#include "divopt/value_functions.hpp"

namespace divopt {

std::vector<double> xi_grid(double x, const std::vector<double>& candidates, int n_uniform) {
    std::vector<double> xs;
    xs.reserve(n_uniform + candidates.size() + 2);
    xs.push_back(0.0);
    xs.push_back(x);
    for (double k : candidates) {
        double xi = x - k;
        if (xi >= 0 && xi <= x) xs.push_back(xi);
    }
    for (int j = 1; j < n_uniform; ++j) xs.push_back(x * j / n_uniform);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

namespace {
std::vector<double> candidate_levels(const Strategy& s) {
    if (auto h = std::get_if<Hybrid>(&s)) return {h->a_p, h->a_c, h->b};
    if (auto pb = std::get_if<PeriodicBarrier>(&s)) return {pb->b};
    if (auto l = std::get_if<Liquidation>(&s)) {
        std::vector<double> v{l->b1};
        if (!l->half()) v.push_back(l->b2);
        return v;
    }
    return {};
}

HJBPoint eval_point(const ModelParams& p, const ValueFunction& vf, const std::vector<double>& cand,
                    double x, int xi_points) {
    HJBPoint pt;
    pt.x = x;
    pt.V = vf.value(x);
    pt.sup1 = 0;  // xi = 0
    pt.sup2 = 0;
    for (double xi : xi_grid(x, cand, xi_points)) {
        const double dv = vf.value(x - xi) - pt.V;
        const double t1 = xi + dv;
        if (t1 > pt.sup1) { pt.sup1 = t1; pt.argmax1 = xi; }
        if (xi > 0) {
            const double t2 = p.beta * xi - p.chi + dv;
            if (t2 > pt.sup2) { pt.sup2 = t2; pt.argmax2 = xi; }
        }
    }
    const double v1 = vf.d1(x), v2 = vf.d2(x);
    pt.generator = 0.5 * p.sigma * p.sigma * v2 + p.mu * v1 - p.delta * pt.V + p.gamma * pt.sup1;
    return pt;
}
}  // namespace

HJBPoint hjb_point(const ModelParams& p, const Roots& r, const Strategy& s, double x, int xi_points) {
    const ValueFunction vf(p, r, s);
    return eval_point(p, vf, candidate_levels(s), x, xi_points);
}

std::vector<double> uniform_grid(double x_max, int n) {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = n == 1 ? 0.0 : x_max * i / (n - 1);
    return xs;
}

HJBReport check_hjb(const ModelParams& p, const Roots& r, const Strategy& s,
                    const std::vector<double>& x_grid, int xi_points, double kink_window) {
    const ValueFunction vf(p, r, s);
    const auto cand = candidate_levels(s);
    auto kinks = vf.kinks();
    kinks.push_back(0.0);
    HJBReport rep;
    rep.xi_points = xi_points;
    rep.max_generator = -std::numeric_limits<double>::infinity();
    for (double x : x_grid) {
        if (x < 0) continue;
        const auto pt = eval_point(p, vf, cand, x, xi_points);
        const double scale = 1.0 + std::abs(pt.V);
        const double s2 = std::abs(pt.sup2) / scale;
        if (s2 > rep.max_sup_residual) { rep.max_sup_residual = s2; rep.worst_sup_x = x; }
        bool near_kink = false;
        for (double k : kinks) near_kink = near_kink || std::abs(x - k) < kink_window;
        if (near_kink) continue;
        ++rep.n_points;
        const double g = pt.generator / scale;
        if (g > rep.max_generator) { rep.max_generator = g; rep.worst_generator_x = x; }
    }
    for (double k : vf.kinks()) {
        const double jump = std::abs(vf.d1(k, Side::Right) - vf.d1(k, Side::Left));
        if (jump > rep.max_c1_jump) { rep.max_c1_jump = jump; rep.worst_kink = k; }
    }
    rep.max_violation = std::max({0.0, rep.max_generator, rep.max_sup_residual, rep.max_c1_jump});
    return rep;
}

GridBounds default_bounds(const ModelParams& p, const Roots& r) {
    if (!(r.alpha > 0)) throw InvalidParameter("grid search needs beta > gamma/(gamma+delta)");
    GridBounds b;
    b.a_max = r.a_bar;
    b.l_max = 5.0 / r.r1;
    b.y_min = p.chi / p.beta + 1e-9;
    b.y_max = b.y_min + 3.0 * p.chi / r.alpha + 5.0 / r.r1;
    return b;
}

double hybrid_objective(const ModelParams& p, const Roots& r, double a, double l, double y) {
    const auto c = hybrid_coefficients(p, r, a, a + l, a + l + y);
    const double d = l + y;
    // middle branch at u = l
    const double Vac = c.A_scaled * std::exp(r.r1 * (l - d)) + (c.B - c.A) * std::exp(r.s1 * l) +
                       r.pvfactor * (l + r.m + c.Va);
    return Vac - p.beta * (a + l);
}

GridSearchResult brute_force_hybrid(const ModelParams& p, const Roots& r, const GridBounds& bd,
                                    int n) {
    if (n < 2) throw InvalidParameter("brute force needs at least 2 points per axis");
    GridSearchResult best;
    best.n_per_axis = n;
    best.objective = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double a = bd.a_max * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            const double l = bd.l_max * j / (n - 1);
            for (int k = 0; k < n; ++k) {
                const double y = bd.y_min + (bd.y_max - bd.y_min) * k / (n - 1);
                const double obj = hybrid_objective(p, r, a, l, y);
                ++best.evaluated;
                if (obj > best.objective) {
                    best.objective = obj;
                    best.a = a;
                    best.l = l;
                    best.y = y;
                }
            }
        }
    }
    return best;
}

PatternAudit audit_derivative_pattern(const ModelParams& p, const Roots& r, const Hybrid& h,
                                      int n_grid, double eq_tol) {
    const ValueFunction vf(p, r, h);
    PatternAudit out;
    const double beta = p.beta;
    out.branch = h.a_p > 0 ? "a_p>0" : (h.a_c > 0 ? "a_p=0<a_c" : "a_p=a_c=0");
    auto flag = [&](double x, double v, const char* what) {
        out.pass = false;
        if (out.violations.size() < 20) out.violations.push_back({x, v, what});
    };
    auto near = [&](double x, double v) { return std::abs(x - v) <= 1e-9 * (1 + v); };

    // equalities at the barriers
    if (h.a_p > 0) {
        ++out.checked;
        const double v = vf.d1(h.a_p);
        if (std::abs(v - 1) > eq_tol) flag(h.a_p, v, "V'(a_p) = 1");
    } else {
        ++out.checked;
        const double v = vf.d1(0.0, Side::Right);
        if (h.a_c > 0 ? !(v > beta && v <= 1 + eq_tol) : !(v > 0 && v <= beta + eq_tol))
            flag(0.0, v, h.a_c > 0 ? "V'(0) in (beta, 1]" : "V'(0) in (0, beta]");
    }
    if (h.a_c > 0) {
        ++out.checked;
        const double v = vf.d1(h.a_c, Side::Right);
        if (std::abs(v - beta) > eq_tol) flag(h.a_c, v, "V'(a_c) = beta");
    }
    ++out.checked;
    {
        const double v = vf.d1(h.b, Side::Left);
        if (std::abs(v - beta) > eq_tol) flag(h.b, v, "V'(b-) = beta");
    }

    const double x_max = h.b + std::max(1.0, h.b);
    for (int i = 0; i < n_grid; ++i) {
        const double x = x_max * (i + 0.5) / n_grid;
        if (near(x, h.a_p) || near(x, h.a_c) || near(x, h.b)) continue;
        const double v = vf.d1(x, Side::Right);
        ++out.checked;
        if (!(v > 0)) flag(x, v, "V' > 0");
        if (x < h.a_p) {
            if (!(v > 1)) flag(x, v, "V' > 1 on [0, a_p)");
        } else if (x < h.a_c) {
            if (!(v > beta && v < 1)) flag(x, v, "V' in (beta, 1) on (a_p, a_c)");
        } else if (x < h.b) {
            if (!(v > 0 && v < beta)) flag(x, v, "V' in (0, beta) on (a_c, b)");
        } else {
            if (std::abs(v - beta) > eq_tol) flag(x, v, "V' = beta on [b, inf)");
        }
    }
    return out;
}

}  // namespace divopt
