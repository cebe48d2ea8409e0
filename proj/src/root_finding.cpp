#include "divopt/root_finding.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "divopt/errors.hpp"

namespace divopt {

namespace {
bool same_sign(double a, double b) { return (a > 0 && b > 0) || (a < 0 && b < 0); }
}  // namespace

RootResult brent(const Fn& fn, double a, double b, RootTol tol) {
    return brent(fn, a, b, fn(a), fn(b), tol);
}

RootResult brent(const Fn& fn, double a, double b, double fa, double fb, RootTol tol) {
    if (std::isnan(fa) || std::isnan(fb)) throw NoBracket("NaN at bracket end");
    if (fa == 0) return {a, fa, 0};
    if (fb == 0) return {b, fb, 0};
    if (same_sign(fa, fb)) {
        std::ostringstream os;
        os << "root not bracketed on [" << a << ", " << b << "]: f = " << fa << ", " << fb;
        throw NoBracket(os.str());
    }
    double c = a, fc = fa, d = b - a, e = d;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int it = 1; it <= tol.max_iter; ++it) {
        if (same_sign(fb, fc)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double t = 2 * eps * std::abs(b) + 0.5 * tol.xtol;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= t || fb == 0 || std::abs(fb) <= tol.ftol) return {b, fb, it};
        if (std::abs(e) >= t && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            double s = fb / fa;
            if (a == c) {
                p = 2 * m * s;
                q = 1 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2 * m * q * (q - r) - (b - a) * (r - 1));
                q = (q - 1) * (r - 1) * (s - 1);
            }
            if (p > 0) q = -q; else p = -p;
            if (2 * p < std::min(3 * m * q - std::abs(t * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > t) ? d : (m > 0 ? t : -t);
        fb = fn(b);
        if (std::isnan(fb)) throw NoBracket("NaN inside bracket");
    }
    return {b, fb, tol.max_iter};
}

Bracket expand_right(const Fn& fn, double lo, double step, double factor, int max_steps,
                     double hard_limit) {
    double flo = fn(lo);
    if (flo == 0) return {lo, lo, flo, flo};
    double hi = lo + step;
    for (int k = 0; k < max_steps; ++k) {
        if (hi > hard_limit) hi = hard_limit;
        double fhi = fn(hi);
        if (!same_sign(flo, fhi)) return {lo, hi, flo, fhi};
        if (hi >= hard_limit) break;
        lo = hi;
        flo = fhi;
        step *= factor;
        hi = lo + step;
    }
    throw NoBracket("bracket expansion exhausted its window");
}

Bracket scan_right(const Fn& fn, double lo, double hi, double step) {
    double x0 = lo, f0 = fn(lo);
    if (f0 == 0) return {x0, x0, f0, f0};
    while (x0 < hi) {
        double x1 = std::min(hi, x0 + step);
        double f1 = fn(x1);
        if (!same_sign(f0, f1)) return {x0, x1, f0, f1};
        x0 = x1;
        f0 = f1;
    }
    throw NoBracket("no sign change found in scan window");
}

double bisect(const Fn& fn, double lo, double hi, double xtol, int max_iter) {
    double flo = fn(lo), fhi = fn(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if (same_sign(flo, fhi)) throw NoBracket("bisection: no sign change");
    for (int i = 0; i < max_iter && hi - lo > xtol; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = fn(mid);
        if (fm == 0) return mid;
        if (same_sign(fm, flo)) { lo = mid; flo = fm; } else { hi = mid; fhi = fm; }
    }
    return 0.5 * (lo + hi);
}

}  // namespace divopt
