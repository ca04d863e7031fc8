#pragma once

#include <cmath>
#include <string>

#include "revcap/errors.hpp"

namespace revcap {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    int max_depth = 52;
};

namespace detail {

template <class F>
double simpson_step(F&& f, double a, double fa, double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth, const QuadratureOptions& opt) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_step(f, a, fa, m, fm, lm, flm);
    const double right = simpson_step(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    // Second acceptance branch: refinement below the roundoff floor of the
    // local values cannot improve the estimate, whatever the requested tol.
    const double noise_floor = 1e-14 * (std::abs(left) + std::abs(right));
    if (std::abs(delta) <= 15.0 * tol || std::abs(delta) <= noise_floor ||
        depth >= opt.max_depth) {
        if (depth >= opt.max_depth && std::abs(delta) > 1e6 * (15.0 * tol)) {
            throw IntegrationError("adaptive Simpson stalled on [" + std::to_string(a) + ", " +
                                   std::to_string(b) + "], local error " + std::to_string(delta));
        }
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1, opt) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1, opt);
}

}  // namespace detail

/// Adaptive Simpson with Richardson extrapolation on [a, b].
/// The caller is responsible for splitting integrands at interior kinks.
template <class F>
double adaptive_simpson(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm)) {
        throw IntegrationError("non-finite integrand on [" + std::to_string(a) + ", " +
                               std::to_string(b) + "]");
    }
    const double whole = detail::simpson_step(f, a, fa, b, fb, m, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, opt.abs_tol, 0, opt);
}

}  // namespace revcap
