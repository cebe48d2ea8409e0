#include "divopt/core_math.hpp"

#include <algorithm>
#include <sstream>

#include "divopt/errors.hpp"

namespace divopt {

void ModelParams::validate() const {
    auto bad = [](const char* what, double v) {
        std::ostringstream os;
        os << "invalid parameter " << what << " = " << v;
        throw InvalidParameter(os.str());
    };
    if (!std::isfinite(mu)) bad("mu", mu);
    if (!(sigma > 0) || !std::isfinite(sigma)) bad("sigma", sigma);
    if (!(chi >= 0) || !std::isfinite(chi)) bad("chi", chi);
    if (!(beta > 0 && beta <= 1)) bad("beta", beta);
    if (!(gamma > 0) || !std::isfinite(gamma)) bad("gamma", gamma);
    if (!(delta > 0) || !std::isfinite(delta)) bad("delta", delta);
}

ModelParams ModelParams::make(double mu, double sigma, double chi, double beta,
                              double gamma, double delta) {
    ModelParams p{mu, sigma, chi, beta, gamma, delta};
    p.validate();
    return p;
}

double gexp(double arg) {
    if (arg > kExpGuard) {
        std::ostringstream os;
        os << "exponential overflow guard tripped (argument " << arg << ")";
        throw NumericOverflow(os.str());
    }
    return std::exp(arg);
}

double laplace_exponent(const ModelParams& p, double theta) {
    return 0.5 * p.sigma * p.sigma * theta * theta + p.mu * theta;
}

std::pair<double, double> quadratic_roots(double mu, double sigma, double q) {
    const double s2 = sigma * sigma;
    const double disc = std::sqrt(mu * mu + 2.0 * s2 * q);
    // the big-magnitude root first, the other from the product r*s = -2q/s2
    if (mu >= 0) {
        double s = (-mu - disc) / s2;
        double r = -2.0 * q / (s2 * s);
        return {r, s};
    }
    double r = (-mu + disc) / s2;
    double s = -2.0 * q / (s2 * r);
    return {r, s};
}

Roots solve_roots(const ModelParams& p) {
    Roots r;
    std::tie(r.r0, r.s0) = quadratic_roots(p.mu, p.sigma, p.delta);
    std::tie(r.r1, r.s1) = quadratic_roots(p.mu, p.sigma, p.gamma + p.delta);
    const double gd = p.gamma + p.delta;
    r.pvfactor = p.gamma / gd;
    r.alpha = p.beta - r.pvfactor;
    r.w = p.delta / gd;
    r.m = p.mu / gd;
    r.kappa = r.pvfactor * r.m;
    r.a_bar = std::max(0.0, std::log((r.s0 * r.s0) / (r.r0 * r.r0)) / (r.r0 - r.s0));
    return r;
}

double f(const Roots& r, double x) { return gexp(r.r0 * x) - std::exp(r.s0 * x); }
double f_d1(const Roots& r, double x) { return r.r0 * gexp(r.r0 * x) - r.s0 * std::exp(r.s0 * x); }
double f_d2(const Roots& r, double x) {
    return r.r0 * r.r0 * gexp(r.r0 * x) - r.s0 * r.s0 * std::exp(r.s0 * x);
}

double g(const Roots& r, double x) { return gexp(r.r1 * x) - std::exp(r.s1 * x); }
double g_d1(const Roots& r, double x) { return r.r1 * gexp(r.r1 * x) - r.s1 * std::exp(r.s1 * x); }
double g_d2(const Roots& r, double x) {
    return r.r1 * r.r1 * gexp(r.r1 * x) - r.s1 * r.s1 * std::exp(r.s1 * x);
}

double J(const Roots& r, double x) {
    return -r.s1 * g(r, x) + (r.r1 - r.s1) * std::expm1(r.s1 * x);
}

double J_prime(const Roots& r, double x) { return -r.r1 * r.s1 * g(r, x); }

double g_ratio(const Roots& r, double x, double b) {
    const double num = std::exp(r.r1 * (x - b)) - std::exp(r.s1 * x - r.r1 * b);
    const double den = -std::expm1((r.s1 - r.r1) * b);
    return num / den;
}

}  // namespace divopt
