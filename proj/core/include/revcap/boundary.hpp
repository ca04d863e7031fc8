#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "revcap/cost.hpp"
#include "revcap/diffusion.hpp"
#include "revcap/interp.hpp"

namespace revcap {

/// Everything the free-boundary system needs, built once per problem instance.
struct BoundarySystem {
    DiffusionModel model;
    FundamentalPair pair;
    QuadraticCost cost;
    ResolventCoeffs coeffs;
    Thresholds thr;
    QuadratureOptions quad{1e-12, 52};
    TailOptions tail{1e-10, 200};
    double root_residual_tol = 1e-10;
};

BoundarySystem make_boundary_system(const DiffusionModel& model, const QuadraticCost& cost);

/// The two smooth-fit functions whose joint root pins the middle-region
/// boundaries, in the one-signed rewritten forms
///   L1 = int_x^y psi (g_c + rho q+) m' + (q+ + q-) psi'(x)/S'(x)
///   L2 = int_x^y phi (g_c - rho q-) m' + (q+ + q-) phi'(y)/S'(y).
/// Finite q_minus required (the irreversible case has no middle region).
double eval_L1(const BoundarySystem& sys, double x, double y, double c);
double eval_L2(const BoundarySystem& sys, double x, double y, double c);

/// Closed-form partials (no quadrature): dL1/dx = -psi(x)(g_c - rho q-) m'(x), etc.
double dL1_dx(const BoundarySystem& sys, double x, double c);
double dL1_dy(const BoundarySystem& sys, double y, double c);
double dL2_dx(const BoundarySystem& sys, double x, double c);
double dL2_dy(const BoundarySystem& sys, double y, double c);

/// Unique root y*(x; c) of L1(x, .; c) = 0 in (dstar_plus(c), d_max), found by
/// bracket expansion from the interior maximum of L1 followed by Brent and a
/// Newton polish. Returns nullopt when no sign change exists before the
/// domain truncation (in particular whenever c >= c_upper_plus_g).
std::optional<double> inner_root_y(const BoundarySystem& sys, double x, double c);

struct PairSolution {
    double x = 0.0;  // dhat_minus(c), disinvest trigger
    double y = 0.0;  // dhat_plus(c), invest trigger
    double res1 = 0.0, res2 = 0.0;
};

/// Nested solve of L1 = L2 = 0 (inner root in y, outer in x), mirroring the
/// existence proof; a warm-start hint switches to the damped 2-D Newton with
/// the analytic Jacobian. none outside (c_lower_minus_g, c_upper_plus_g).
std::optional<PairSolution> solve_pair(const BoundarySystem& sys, double c,
                                       const PairSolution* hint = nullptr);

/// One-sided closed forms of the optimal boundaries:
///   chat_plus(d)  = rho [beta - (psi/psi') beta' - q+]
///   chat_minus(d) = rho [beta - (phi/phi') beta' + q-]   (+inf if irreversible)
double chat_plus_onesided(const BoundarySystem& sys, double d);
double chat_minus_onesided(const BoundarySystem& sys, double d);

enum class Region { Invest, Continue, Disinvest };

struct TabulateOptions {
    double c_lo = std::numeric_limits<double>::quiet_NaN();
    double c_hi = std::numeric_limits<double>::quiet_NaN();
    double d_lo = std::numeric_limits<double>::quiet_NaN();
    double d_hi = std::numeric_limits<double>::quiet_NaN();
    int n_middle = 81;
    int n_onesided = 240;
    double junction_eps_rel = 1e-6;
};

/// Complete boundary table: middle-region samples (c, x*, y*), the pasted
/// piecewise boundaries chat_plus / chat_minus and their pseudo-inverses.
/// Immutable after construction; evaluation is monotone-PCHIP backed with an
/// interpolation budget of 1e-6 (verified by mid-grid re-solves in the tests).
class BoundaryTable {
public:
    const std::vector<double>& c_grid() const { return c_grid_; }
    const std::vector<double>& x_star() const { return x_star_; }
    const std::vector<double>& y_star() const { return y_star_; }
    bool has_middle() const { return !c_grid_.empty(); }
    bool irreversible() const { return irreversible_; }

    double chat_plus(double d) const;
    double chat_minus(double d) const;  // +inf when irreversible
    double dhat_plus(double c) const;   // inf{d : chat_plus(d) >= c}, extended
    double dhat_minus(double c) const;  // sup{d : chat_minus(d) <= c}, extended

    std::pair<double, double> region_splits() const { return {c_lower_minus_g_, c_upper_plus_g_}; }
    double junction_plus_d() const { return junction_plus_d_; }
    double junction_minus_d() const { return junction_minus_d_; }
    double junction_plus_gap() const { return junction_plus_gap_; }
    double junction_minus_gap() const { return junction_minus_gap_; }
    double max_residual() const { return max_residual_; }

    double d_lo() const { return d_lo_; }
    double d_hi() const { return d_hi_; }
    double d_min() const { return d_min_; }
    double d_max() const { return d_max_; }

    /// Knots of the pasted chat_plus / chat_minus curves, for CSV emission.
    const std::vector<double>& plus_knots_d() const { return plus_d_; }
    const std::vector<double>& plus_knots_c() const { return plus_c_; }
    const std::vector<double>& minus_knots_d() const { return minus_d_; }
    const std::vector<double>& minus_knots_c() const { return minus_c_; }

    friend BoundaryTable tabulate(const BoundarySystem& sys, const TabulateOptions& opt);

private:
    std::vector<double> c_grid_, x_star_, y_star_;
    std::vector<double> plus_d_, plus_c_, minus_d_, minus_c_;
    PchipCurve chat_plus_curve_, chat_minus_curve_;
    PchipCurve dhat_plus_curve_, dhat_minus_curve_;
    bool irreversible_ = false;
    double c_lower_minus_g_ = 0.0, c_upper_plus_g_ = 0.0;
    double junction_plus_d_ = 0.0, junction_minus_d_ = 0.0;
    double junction_plus_gap_ = 0.0, junction_minus_gap_ = 0.0;
    double max_residual_ = 0.0;
    double d_lo_ = 0.0, d_hi_ = 0.0;
    double d_min_ = 0.0, d_max_ = 0.0;
    double chat_plus_floor_c_ = 0.0;  // chat_plus at the lowest tabulated d
};

BoundaryTable tabulate(const BoundarySystem& sys, const TabulateOptions& opt);

/// Invest iff c <= chat_plus(d) (closed action regions), Disinvest iff
/// c >= chat_minus(d), Continue otherwise.
Region classify(const BoundaryTable& table, double c, double d);

}  // namespace revcap
