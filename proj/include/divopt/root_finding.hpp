#pragma once

#include <cmath>
#include <functional>
#include <limits>

namespace divopt {

struct RootResult {
    double x = 0;
    double fx = 0;
    int iterations = 0;
};

struct RootTol {
    double xtol = 1e-12;  // abscissa
    double ftol = 0.0;    // stop early if |f| <= ftol
    int max_iter = 300;
};

using Fn = std::function<double(double)>;

// Brent on [a, b]; fa, fb must have opposite signs (or one of them zero).
// Throws NoBracket otherwise.
RootResult brent(const Fn& fn, double a, double b, double fa, double fb, RootTol tol = {});
RootResult brent(const Fn& fn, double a, double b, RootTol tol = {});

// Starting from lo (sign of fn(lo) = sgn_lo), grow hi = lo + step*factor^k
// until the sign flips. Returns (lo, hi) as a bracket or throws NoBracket.
struct Bracket {
    double lo, hi, flo, fhi;
};
Bracket expand_right(const Fn& fn, double lo, double step, double factor = 2.0,
                     int max_steps = 200, double hard_limit = std::numeric_limits<double>::infinity());

// Scan [lo, hi] left to right with fixed step, returning the first sign change.
Bracket scan_right(const Fn& fn, double lo, double hi, double step);

// plain bisection to a target on a monotone function (used for inverse maps)
double bisect(const Fn& fn, double lo, double hi, double xtol = 1e-15, int max_iter = 200);

}  // namespace divopt
