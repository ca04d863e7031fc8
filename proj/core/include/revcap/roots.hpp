#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "revcap/errors.hpp"

namespace revcap {

struct RootOptions {
    double x_tol = 0.0;     // extra absolute x tolerance on top of machine spacing
    int max_iter = 200;
};

/// Classic Brent root finder on a sign-changing bracket [a, b].
/// fa, fb are f(a), f(b); they must have opposite signs (zero endpoints accepted).
template <class F>
double brent_root(F&& f, double a, double b, double fa, double fb, const RootOptions& opt = {}) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) {
        throw SolverError("brent_root: root not bracketed on [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
    }
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
                            0.5 * opt.x_tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    return b;
}

/// Bisection for the inverse of a strictly monotone function: solves f(x) = target
/// on [lo, hi] to absolute tolerance x_tol.
template <class F>
double bisect_monotone(F&& f, double target, double lo, double hi, bool increasing,
                       double x_tol = 1e-12) {
    for (int it = 0; it < 400 && (hi - lo) > x_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const bool go_right = increasing ? (f(mid) < target) : (f(mid) > target);
        if (go_right)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace revcap
