#pragma once

#include <functional>

#include "revcap/diffusion.hpp"

namespace revcap {

/// Quadratic running cost g(c, d) = (1/2)(c^2 - 2 beta0(d) c + alpha0(d)) with
/// proportional transaction costs q_plus (invest) and q_minus (disinvest,
/// +inf for the irreversible case). beta0 must be strictly increasing.
struct QuadraticCost {
    std::function<double(double)> alpha0;
    std::function<double(double)> beta0;
    double q_plus = 1.0;
    double q_minus = kInf;

    bool irreversible() const { return q_minus == kInf; }
};

/// Validates the declared structure on a 1000-point grid over [lo, hi]:
/// beta0 strictly increasing and alpha0 >= beta0^2 (so that min_c g >= 0).
/// Throws std::domain_error on violation.
QuadraticCost make_quadratic_cost(std::function<double(double)> alpha0,
                                  std::function<double(double)> beta0, double q_plus,
                                  double q_minus, double lo, double hi);

double running_cost(const QuadraticCost& cost, double c, double d);

/// g_c(c, d) = c - beta0(d).
double marginal_cost(const QuadraticCost& cost, double c, double d);

/// Resolvents alpha(d) = R alpha0, beta(d) = R beta0 and the derivative
/// beta'(d) from the differentiated Green representation
///   beta'(d) = [phi'(d) int_{d_min}^d psi beta0 m' + psi'(d) int_d^{d_max} phi beta0 m'] / w
/// (the kernel-diagonal terms cancel), with a five-point central-difference
/// fallback when the tail test of the kernel quadrature fails.
class ResolventCoeffs {
public:
    ResolventCoeffs() = default;
    ResolventCoeffs(FundamentalPair pair, QuadraticCost cost, QuadratureOptions q = {},
                    TailOptions t = {});

    double alpha(double d) const;
    double beta(double d) const;
    double beta_prime(double d) const;

    const FundamentalPair& pair() const { return pair_; }
    const QuadraticCost& cost() const { return cost_; }

private:
    FundamentalPair pair_;
    QuadraticCost cost_;
    QuadratureOptions quad_;
    TailOptions tail_;
};

ResolventCoeffs resolvent_coeffs(const DiffusionModel& model, const FundamentalPair& pair,
                                 const QuadraticCost& cost, QuadratureOptions q = {},
                                 TailOptions t = {});

/// VHat(c, d) = E int e^{-rho t} g(c, D_t) dt = (1/2)(c^2/rho - 2 beta(d) c + alpha(d)).
double vhat(const ResolventCoeffs& coeffs, double rho, double c, double d);
double vhat_c(const ResolventCoeffs& coeffs, double rho, double c, double d);
double vhat_cd(const ResolventCoeffs& coeffs, double c, double d);

/// The g-induced thresholds partitioning the capacity axis.
/// For the quadratic cost:
///   chat_plus_g(d)  = beta0(d) - rho q_plus,
///   chat_minus_g(d) = beta0(d) + rho q_minus,
///   c_lower_minus_g = inf beta0 + rho q_minus,   c_upper_plus_g = sup beta0 - rho q_plus,
///   dstar_plus(c)   = beta0^{-1}(c + rho q_plus),  dstar_minus(c) = beta0^{-1}(c - rho q_minus),
/// with inf/sup over the open interval and the conventions inf{} = d_max,
/// sup{} = d_min; all quantities are extended reals.
class Thresholds {
public:
    Thresholds() = default;
    Thresholds(const QuadraticCost& cost, const DiffusionModel& model, double op_lo, double op_hi);

    double chat_plus_g(double d) const;
    double chat_minus_g(double d) const;
    double c_lower_minus_g() const { return c_lower_minus_g_; }
    double c_upper_plus_g() const { return c_upper_plus_g_; }
    double dstar_plus(double c) const;
    double dstar_minus(double c) const;
    double beta0_inf() const { return beta0_inf_; }
    double beta0_sup() const { return beta0_sup_; }

    /// Inverse of beta0 by expanding bracket + bisection (1e-12 relative).
    double inverse_beta0(double target) const;

private:
    QuadraticCost cost_;
    double rho_ = 0.0;
    double d_min_ = 0.0, d_max_ = 0.0, d0_ = 1.0;
    double op_lo_ = 0.0, op_hi_ = 0.0;  // operational cutoffs for probing/bisection
    double beta0_inf_ = 0.0, beta0_sup_ = 0.0;
    double c_lower_minus_g_ = 0.0, c_upper_plus_g_ = 0.0;
};

Thresholds thresholds(const QuadraticCost& cost, const DiffusionModel& model);
Thresholds thresholds(const QuadraticCost& cost, const DiffusionModel& model, double op_lo,
                      double op_hi);

}  // namespace revcap
