#include "revcap/cost.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "revcap/errors.hpp"
#include "revcap/roots.hpp"

namespace revcap {

QuadraticCost make_quadratic_cost(std::function<double(double)> alpha0,
                                  std::function<double(double)> beta0, double q_plus,
                                  double q_minus, double lo, double hi) {
    if (!(q_plus > 0) || !(q_minus > 0))
        throw std::domain_error("transaction costs q_plus, q_minus must be positive");
    QuadraticCost cost{std::move(alpha0), std::move(beta0), q_plus, q_minus};
    const int n = 1000;
    double prev = cost.beta0(lo);
    for (int i = 1; i <= n; ++i) {
        const double d = lo + (hi - lo) * i / n;
        const double b = cost.beta0(d);
        if (!(b > prev))
            throw std::domain_error("beta0 must be strictly increasing (fails near d = " +
                                    std::to_string(d) + ")");
        prev = b;
    }
    for (int i = 0; i <= n; ++i) {
        const double d = lo + (hi - lo) * i / n;
        const double b = cost.beta0(d);
        if (cost.alpha0(d) < b * b - 1e-12 * (1.0 + b * b))
            throw std::domain_error("g must be nonnegative: alpha0 < beta0^2 near d = " +
                                    std::to_string(d));
    }
    return cost;
}

double running_cost(const QuadraticCost& cost, double c, double d) {
    return 0.5 * (c * c - 2.0 * cost.beta0(d) * c + cost.alpha0(d));
}

double marginal_cost(const QuadraticCost& cost, double c, double d) {
    return c - cost.beta0(d);
}

ResolventCoeffs::ResolventCoeffs(FundamentalPair pair, QuadraticCost cost, QuadratureOptions q,
                                 TailOptions t)
    : pair_(std::move(pair)), cost_(std::move(cost)), quad_(q), tail_(t) {}

ResolventCoeffs resolvent_coeffs(const DiffusionModel& model, const FundamentalPair& pair,
                                 const QuadraticCost& cost, QuadratureOptions q, TailOptions t) {
    (void)model;  // the pair already carries the model; kept for call-site symmetry
    return ResolventCoeffs(pair, cost, q, t);
}

double ResolventCoeffs::alpha(double d) const {
    return resolvent(pair_, cost_.alpha0, d, quad_, tail_);
}

double ResolventCoeffs::beta(double d) const {
    return resolvent(pair_, cost_.beta0, d, quad_, tail_);
}

double ResolventCoeffs::beta_prime(double d) const {
    try {
        const double left = pair_.integral_left(d, cost_.beta0, quad_, tail_);
        const double right = pair_.integral_right(d, cost_.beta0, quad_, tail_);
        return (pair_.phi_prime(d) * left + pair_.psi_prime(d) * right) / pair_.wronskian();
    } catch (const IntegrationError&) {
        const double h = 1e-4 * (1.0 + std::abs(d));
        const double b2 = beta(d + 2 * h), b1 = beta(d + h), a1 = beta(d - h), a2 = beta(d - 2 * h);
        return (-b2 + 8 * b1 - 8 * a1 + a2) / (12 * h);
    }
}

double vhat(const ResolventCoeffs& coeffs, double rho, double c, double d) {
    return 0.5 * (c * c / rho - 2.0 * coeffs.beta(d) * c + coeffs.alpha(d));
}

double vhat_c(const ResolventCoeffs& coeffs, double rho, double c, double d) {
    return c / rho - coeffs.beta(d);
}

double vhat_cd(const ResolventCoeffs& coeffs, double c, double d) {
    (void)c;
    return -coeffs.beta_prime(d);
}

Thresholds::Thresholds(const QuadraticCost& cost, const DiffusionModel& model, double op_lo,
                       double op_hi)
    : cost_(cost),
      rho_(model.rho),
      d_min_(model.d_min),
      d_max_(model.d_max),
      d0_(model.d0),
      op_lo_(op_lo),
      op_hi_(op_hi) {
    beta0_inf_ = cost_.beta0(op_lo_);
    beta0_sup_ = cost_.beta0(op_hi_);
    // Open-interval inf/sup: treat cutoff values within roundoff of an
    // asymptote as the honest extended limit when the slope keeps growing.
    c_lower_minus_g_ = beta0_inf_ + rho_ * cost_.q_minus;  // +inf if irreversible
    c_upper_plus_g_ = beta0_sup_ - rho_ * cost_.q_plus;
    if (!std::isfinite(d_max_) && cost_.beta0(op_hi_) > cost_.beta0(0.5 * op_hi_) + 1.0)
        c_upper_plus_g_ = kInf;  // beta0 unbounded above on an unbounded interval
    if (!std::isfinite(d_min_) && cost_.beta0(op_lo_) < cost_.beta0(0.5 * op_lo_) - 1.0)
        c_lower_minus_g_ = -kInf;
}

double Thresholds::chat_plus_g(double d) const { return cost_.beta0(d) - rho_ * cost_.q_plus; }

double Thresholds::chat_minus_g(double d) const { return cost_.beta0(d) + rho_ * cost_.q_minus; }

double Thresholds::inverse_beta0(double target) const {
    if (target <= cost_.beta0(op_lo_)) return op_lo_;
    if (target >= cost_.beta0(op_hi_)) return op_hi_;
    // Expand a bracket out from the reference point (halve the gap toward a
    // finite endpoint, double an additive step toward an infinite one), then
    // bisect. Pure bisection over the operational range would not converge
    // when the cutoffs sit hundreds of decades from the root.
    double a = d0_, b = d0_;
    double step = 0.5 * (1.0 + std::abs(d0_));
    if (cost_.beta0(d0_) < target) {
        for (int k = 0; k < 2000 && cost_.beta0(b) < target; ++k) {
            a = b;
            b = std::isfinite(d_max_) ? d_max_ + 0.5 * (b - d_max_) : b + step;
            step *= 2.0;
            if (b >= op_hi_) { b = op_hi_; break; }
        }
    } else {
        for (int k = 0; k < 2000 && cost_.beta0(a) > target; ++k) {
            b = a;
            a = std::isfinite(d_min_) ? d_min_ + 0.5 * (a - d_min_) : a - step;
            step *= 2.0;
            if (a <= op_lo_) { a = op_lo_; break; }
        }
    }
    return bisect_monotone(cost_.beta0, target, a, b, /*increasing=*/true,
                           1e-13 * (1.0 + std::abs(a) + std::abs(b)));
}

double Thresholds::dstar_plus(double c) const {
    const double target = c + rho_ * cost_.q_plus;
    if (target >= beta0_sup_) return d_max_;  // inf of empty set
    if (target <= beta0_inf_) return d_min_;
    return inverse_beta0(target);
}

double Thresholds::dstar_minus(double c) const {
    const double target = c - rho_ * cost_.q_minus;  // -inf if irreversible
    if (target <= beta0_inf_) return d_min_;          // sup of empty set
    if (target >= beta0_sup_) return d_max_;
    return inverse_beta0(target);
}

Thresholds thresholds(const QuadraticCost& cost, const DiffusionModel& model, double op_lo,
                      double op_hi) {
    return Thresholds(cost, model, op_lo, op_hi);
}

Thresholds thresholds(const QuadraticCost& cost, const DiffusionModel& model) {
    const FundamentalPair pair = fundamental_pair(model);
    return Thresholds(cost, model, pair.trunc_lo(), pair.trunc_hi());
}

}  // namespace revcap
