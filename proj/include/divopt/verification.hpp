#pragma once

#include <string>
#include <vector>

#include "divopt/core_math.hpp"
#include "divopt/strategy.hpp"

namespace divopt {

struct HJBPoint {
    double x = 0;
    double V = 0;
    double generator = 0;  // (A - delta) V + gamma * sup1
    double sup1 = 0, argmax1 = 0;  // sup over xi of xi + V(x - xi) - V(x)
    double sup2 = 0, argmax2 = 0;  // sup over xi of (beta xi - chi)1{xi>0} + V(x - xi) - V(x)
};

struct HJBReport {
    int n_points = 0;           // points actually checked for the generator inequality
    int xi_points = 0;          // uniform xi fill per x
    double max_violation = 0;   // max of the three quantities below
    double max_generator = 0;   // max over x of generator/(1+|V|); <= tol wanted
    double max_sup_residual = 0;  // max over x of |sup2|/(1+|V|)
    double max_c1_jump = 0;       // max over kinks of |V'(k+) - V'(k-)|, the C^1 requirement
    double worst_generator_x = 0;
    double worst_sup_x = 0;
    double worst_kink = 0;
    bool pass(double tol = 1e-6) const { return max_violation <= tol; }
};

// xi grid: {0, x} plus x - k for each k in `candidates` that lies in [0, x],
// plus a uniform fill of n_uniform intervals on [0, x]
std::vector<double> xi_grid(double x, const std::vector<double>& candidates, int n_uniform);

HJBPoint hjb_point(const ModelParams& p, const Roots& r, const Strategy& s, double x,
                   int xi_points = 400);

// x_grid points closer than kink_window to a kink are skipped for the generator
HJBReport check_hjb(const ModelParams& p, const Roots& r, const Strategy& s,
                    const std::vector<double>& x_grid, int xi_points = 400,
                    double kink_window = 1e-6);

// default grid: n points uniform on [0, x_max]
std::vector<double> uniform_grid(double x_max, int n);

struct GridBounds {
    double a_max = 0, l_max = 0, y_min = 0, y_max = 0;
};
// box built from the parameters alone
GridBounds default_bounds(const ModelParams& p, const Roots& r);

struct GridSearchResult {
    double a = 0, l = 0, y = 0;
    double objective = 0;  // V(a_c) - beta a_c
    int n_per_axis = 0;
    long evaluated = 0;
    Hybrid strategy() const { return {a, a + l, a + l + y}; }
};

// V(a_c) - beta a_c for the hybrid (a, a+l, a+l+y)
double hybrid_objective(const ModelParams& p, const Roots& r, double a, double l, double y);

GridSearchResult brute_force_hybrid(const ModelParams& p, const Roots& r, const GridBounds& b,
                                    int n_per_axis);

struct PatternViolation {
    double x = 0;
    double d1 = 0;
    std::string expected;
};

struct PatternAudit {
    bool pass = true;
    std::string branch;  // "a_p>0", "a_p=0<a_c", "a_p=a_c=0"
    std::vector<PatternViolation> violations;
    int checked = 0;
};

PatternAudit audit_derivative_pattern(const ModelParams& p, const Roots& r, const Hybrid& h,
                                      int n_grid = 2000, double eq_tol = 1e-7);

}  // namespace divopt
