#pragma once

#include <limits>
#include <string>
#include <vector>

#include "divopt/core_math.hpp"
#include "divopt/strategy.hpp"

namespace divopt {

enum class Regime {
    ProfitablePeriodic,
    ProfitableHybrid,
    UnprofitablePeriodicZero,
    UnprofitableLiquidationFinite,
    UnprofitableLiquidationHalf,
};

// short labels used in CSV output
std::string regime_label(Regime r);

Regime classify_regime(const ModelParams& p, const Roots& r);

// Q(a) = 1 - (f(a)/f'(a)) / (mu/delta)
double Q_function(const ModelParams& p, const Roots& r, double a);
double I_function(const ModelParams& p, const Roots& r, double x, double q);
// -s1 p / (-s1 + q (r1 + s1)), the limit of V'(a_p) as the gap terms vanish
double K_function(const Roots& r, double q);

double periodic_b0(const ModelParams& p, const Roots& r);

// periodic-zero helpers, mu < 0
double a_beta(const ModelParams& p, const Roots& r, double beta_prime);
double c_beta_chi(const ModelParams& p, const Roots& r);
double Lambda(const ModelParams& p, const Roots& r, double beta_prime);
// Lambda^{-1}(chi/beta); OutOfRange if chi/beta >= -mu/(gamma+delta)
double beta0(const ModelParams& p, const Roots& r);
// the beta at which beta = Lambda^{-1}(chi/beta), i.e. the regime boundary in beta
double beta0_boundary(const ModelParams& p);

struct Hints {
    bool predict_ap_zero = false;
    bool predict_ac_zero = false;
    double nu = 0;
    double ratio = 0;  // (-s1/r1) * gamma/(gamma+delta)
};
Hints sufficient_condition_hints(const ModelParams& p, const Roots& r);

struct AuxiliaryQuantities {
    double nu = std::numeric_limits<double>::quiet_NaN();
    double q_star = std::numeric_limits<double>::quiet_NaN();
    double b0 = std::numeric_limits<double>::quiet_NaN();
    double a_beta = std::numeric_limits<double>::quiet_NaN();
    double c_beta_chi = std::numeric_limits<double>::quiet_NaN();
    double beta0 = std::numeric_limits<double>::quiet_NaN();
    double Lambda_beta = std::numeric_limits<double>::quiet_NaN();
};
AuxiliaryQuantities auxiliary_quantities(const ModelParams& p, const Roots& r);

struct SolveOptions {
    double tol = 1e-8;     // residual acceptance
    double xtol = 1e-12;   // abscissa tolerance of the outer searches
    double window = 1.0;   // scales the initial search windows
    int max_expand = 200;
    bool allow_asymptotic = true;
};

struct Residual {
    std::string name;
    double value = 0;
    bool boundary = false;  // inequality form (barrier pinned at 0)
};

struct SolveReport {
    Regime regime{};
    Strategy strategy;
    double a_p = std::numeric_limits<double>::quiet_NaN();
    double a_c = std::numeric_limits<double>::quiet_NaN();
    double b = std::numeric_limits<double>::quiet_NaN();
    double b1 = std::numeric_limits<double>::quiet_NaN();
    double b2 = std::numeric_limits<double>::quiet_NaN();
    double b0 = std::numeric_limits<double>::quiet_NaN();
    std::vector<Residual> residuals;
    bool ap_zero = false;
    bool ac_eq_ap = false;
    bool asymptotic = false;
    long evaluations = 0;
    std::string note;

    double max_residual() const;
    bool converged(double tol) const { return max_residual() < tol; }
};

SolveReport solve_hybrid(const ModelParams& p, const Roots& r, const SolveOptions& o = {});
SolveReport solve_unprofitable(const ModelParams& p, const Roots& r, const SolveOptions& o = {});
SolveReport solve_periodic(const ModelParams& p, const Roots& r, const SolveOptions& o = {});
// classify, then dispatch
SolveReport solve(const ModelParams& p, const SolveOptions& o = {});

// V'(b-) - beta for the (b, inf) liquidation, and its (b1, b2) counterpart at b1
double liquidation_smooth_fit(const ModelParams& p, const Roots& r, double b);

}  // namespace divopt
