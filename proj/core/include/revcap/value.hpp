#pragma once

#include <utility>

#include "revcap/boundary.hpp"

namespace revcap {

/// A'(c), B'(c) in the middle region from the C1-fit linear system evaluated
/// at the solved pair (x*(c), y*(c)):
///   A' psi(d) + B' phi(d) + VHat_c(c, d) = -q+ at d = y*,  = q- at d = x*.
std::pair<double, double> coeff_derivatives(const BoundarySystem& sys, const BoundaryTable& table,
                                            double c);

struct ValueOptions {
    double c_lo = std::numeric_limits<double>::quiet_NaN();  // defaults from the table
    double c_hi = std::numeric_limits<double>::quiet_NaN();
    int n_coeff_nodes = 260;   // knots per region piece of the A/B curves
    int n_cache_nodes = 900;   // knots of the alpha/beta coefficient caches
    double fd_step_rel = 1e-3;  // relative d-step for the residual stencils
};

/// The assembled piecewise value function
///   v = A psi + B phi + VHat   on the closed continuation region,
///   v = z+ - q+ c              on the invest region,
///   v = z- + q- c              on the disinvest region,
/// with A, B stored as piecewise curves whose knot data (value, A', A'') is
/// exact: A'/B' from the C1 fit, A''/B'' from v_cc = 0 along the boundaries
/// (differentiating v_c = -q+ along d = dhat_plus and v_c = q- along
/// d = dhat_minus, using the vanishing mixed derivative). A is anchored to 0
/// at c_upper_plus_g and B to 0 at c_lower_minus_g; an unbounded anchor is
/// handled by doubling extension chunks plus a measured-ratio geometric tail.
class ValueFunction {
public:
    double value(double c, double d) const;
    double value_c(double c, double d) const;
    double z_plus(double d) const;
    double z_minus(double d) const;

    double A(double c) const { return A_.value(c); }
    double A_prime(double c) const { return A_.derivative(c); }
    double A_second(double c) const { return A_.second_derivative(c); }
    double B(double c) const { return B_zero_ ? 0.0 : B_.value(c); }
    double B_prime(double c) const { return B_zero_ ? 0.0 : B_.derivative(c); }
    double B_second(double c) const { return B_zero_ ? 0.0 : B_.second_derivative(c); }

    /// Cached coefficient curves (alpha, beta, beta').
    double alpha_of(double d) const { return alpha_curve_(d); }
    double beta_of(double d) const { return beta_curve_(d); }
    double beta_prime_of(double d) const { return beta_prime_curve_(d); }
    double vhat(double c, double d) const;
    double vhat_c(double c, double d) const;
    double vhat_cd(double c, double d) const { return -beta_prime_curve_(d); }

    /// max{ Lv - g, -v_c - q+, v_c - q- } with Lv = rho v - mu v_d - (1/2) s^2 v_dd;
    /// v_d, v_dd by five-point differences with the stencil confined to the
    /// point's own region (one-sided next to a boundary or a domain cutoff).
    double vi_residual(double c, double d) const;

    /// A' psi' + B' phi' + VHat_cd at (dhat_minus(c), dhat_plus(c)); the missing
    /// side in a one-sided region is NaN.
    std::pair<double, double> smooth_fit_residual(double c) const;

    Region region(double c, double d) const { return classify(table_, c, d); }
    const BoundaryTable& table() const { return table_; }
    const DiffusionModel& model() const { return model_; }
    const FundamentalPair& pair() const { return pair_; }
    double rho() const { return model_.rho; }
    double q_plus() const { return q_plus_; }
    double q_minus() const { return q_minus_; }

    /// Boundary locations used by the smooth-fit report (middle-region maps).
    double x_star_at(double c) const;
    double y_star_at(double c) const;

    friend ValueFunction build_value(const BoundarySystem& sys, const BoundaryTable& table,
                                     const ValueOptions& opt);

private:
    double continuation_value(double c, double d) const;

    DiffusionModel model_;
    FundamentalPair pair_;
    BoundaryTable table_;
    QuadraticCost cost_;
    double q_plus_ = 0.0, q_minus_ = kInf;
    CoeffCurve A_, B_;
    bool B_zero_ = true;
    HermiteCurve alpha_curve_, beta_curve_, beta_prime_curve_;
    PchipCurve xstar_of_c_, ystar_of_c_;  // middle-region boundary maps
    PchipCurve dplus_of_c_;               // one-sided dhat_plus map (region 2)
    double mid_lo_ = kInf, mid_hi_ = -kInf;
    double fd_step_rel_ = 1e-3;
    double cov_lo_ = 0.0, cov_hi_ = 0.0;  // cached d-coverage
};

ValueFunction build_value(const BoundarySystem& sys, const BoundaryTable& table,
                          const ValueOptions& opt = {});

}  // namespace revcap
