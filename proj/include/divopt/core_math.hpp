#pragma once

#include <cmath>
#include <utility>

namespace divopt {

struct ModelParams {
    double mu = 0.0;
    double sigma = 1.0;
    double chi = 0.0;
    double beta = 1.0;
    double gamma = 1.0;
    double delta = 0.1;

    // throws InvalidParameter
    void validate() const;
    static ModelParams make(double mu, double sigma, double chi, double beta,
                            double gamma, double delta);
};

struct Roots {
    double r0 = 0, s0 = 0;  // psi = delta
    double r1 = 0, s1 = 0;  // psi = gamma + delta
    double alpha = 0;       // beta - gamma/(gamma+delta)
    double pvfactor = 0;    // gamma/(gamma+delta)
    double a_bar = 0;

    // convenience constants used all over the value formulas
    double w = 0;      // delta/(gamma+delta)
    double m = 0;      // mu/(gamma+delta)
    double kappa = 0;  // gamma*mu/(gamma+delta)^2
};

// exp with an explicit overflow guard
constexpr double kExpGuard = 700.0;
double gexp(double arg);

double laplace_exponent(const ModelParams& p, double theta);

// positive and negative roots of sigma^2/2 th^2 + mu th = q, q > 0
std::pair<double, double> quadratic_roots(double mu, double sigma, double q);

Roots solve_roots(const ModelParams& p);

// scale-type functions
double f(const Roots& r, double x);
double f_d1(const Roots& r, double x);
double f_d2(const Roots& r, double x);
double g(const Roots& r, double x);
double g_d1(const Roots& r, double x);
double g_d2(const Roots& r, double x);
double J(const Roots& r, double x);
double J_prime(const Roots& r, double x);

// g(x)/g(b) without forming either factor, 0 <= x <= b, b > 0
double g_ratio(const Roots& r, double x, double b);

}  // namespace divopt
