#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "revcap/interp.hpp"
#include "revcap/quadrature.hpp"

namespace revcap {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Uncontrolled demand diffusion dD = mu(D) dt + sigma(D) dW on the open state
/// interval (d_min, d_max), discounted at rate rho. Immutable once built.
struct DiffusionModel {
    enum class Kind { GBM, Generic };

    Kind kind = Kind::GBM;
    double mu_coef = 0.0;     // GBM: mu(d) = mu_coef * d
    double sigma_coef = 1.0;  // GBM: sigma(d) = sigma_coef * d
    std::function<double(double)> drift_fn;  // Generic
    std::function<double(double)> vol_fn;    // Generic
    double d_min = 0.0;
    double d_max = kInf;
    double d0 = 1.0;  // reference point; psi(d0) = phi(d0) = S'(d0) = 1
    double rho = 1.0;
    // Operational range for Generic sweeps and for bracket/truncation caps.
    double work_lo = std::numeric_limits<double>::quiet_NaN();
    double work_hi = std::numeric_limits<double>::quiet_NaN();

    static DiffusionModel gbm(double mu, double sigma, double rho, double d0 = 1.0);
    static DiffusionModel generic(std::function<double(double)> drift,
                                  std::function<double(double)> vol, double d_min, double d_max,
                                  double rho, double d0, double work_lo, double work_hi);

    double drift(double d) const;
    double vol(double d) const;
    bool interior(double d) const { return d > d_min && d < d_max; }
    void require_interior(double d) const;

    /// Checks nondegeneracy, the interior reference point, and for GBM the
    /// discount condition rho > max(0, 2 mu + sigma^2). Throws std::domain_error.
    void validate() const;
};

/// Density of the scale function, exp(-int_{d0}^{d} 2 mu / sigma^2).
double scale_density(const DiffusionModel& model, double d);

/// Density of the speed measure, 2 / (sigma^2(d) S'(d)).
double speed_density(const DiffusionModel& model, double d);

struct SamplePath {
    enum class Scheme { ExactGBM, EulerMaruyama };
    std::vector<double> times;
    std::vector<double> values;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::ExactGBM;
};

SamplePath sample_path(const DiffusionModel& model, double d_start, double dt, double horizon,
                       std::uint64_t seed, std::uint64_t path_index = 0);

struct TailOptions {
    double rel_budget = 1e-9;  // accepted tail mass relative to the accumulated integral
    int max_chunks = 200;
};

/// Increasing/decreasing fundamental solutions of
///   rho u - mu u' - (1/2) sigma^2 u'' = 0,
/// normalized to psi(d0) = phi(d0) = 1, plus scale/speed densities, the
/// Wronskian and the resolvent quadratures built on them.
///
/// GBM uses the closed-form powers (d/d0)^m, (d/d0)^n. Generic integrates the
/// Riccati equation for the log-derivatives with an embedded RK45: the
/// increasing solution's ratio psi'/psi is the forward-attracting Riccati
/// branch, so a single sweep up from the lower cutoff (seeded at the frozen
/// upper root) converges onto it; the decreasing solution is the mirror sweep
/// down from the upper cutoff. Values come from exponentiating the integrated
/// log-derivative, which keeps the sweep overflow-free near natural boundaries.
class FundamentalPair {
public:
    double psi(double d) const;
    double psi_prime(double d) const;
    double phi(double d) const;
    double phi_prime(double d) const;
    /// Second derivatives via the ODE itself: u'' = 2(rho u - mu u') / sigma^2.
    double psi_second(double d) const;
    double phi_second(double d) const;

    double scale_density(double d) const;
    double speed_density(double d) const;
    double wronskian() const { return wronskian_; }

    const DiffusionModel& model() const { return model_; }
    /// GBM characteristic exponents (positive/negative root); NaN for Generic.
    double exponent_pos() const { return m_; }
    double exponent_neg() const { return n_; }

    /// Operational truncation cutoffs for improper integrals and brackets.
    double trunc_lo() const { return trunc_lo_; }
    double trunc_hi() const { return trunc_hi_; }

    /// int_{d_min}^{d} psi f m'  and  int_{d}^{d_max} phi f m', with the
    /// unbounded ends truncated once the exact remaining mass of psi m' / phi m'
    /// (from psi'/(rho S') and -phi'/(rho S')) times a local |f| probe drops
    /// below the tail budget.
    double integral_left(double d, const std::function<double(double)>& f,
                         const QuadratureOptions& q = {}, const TailOptions& t = {}) const;
    double integral_right(double d, const std::function<double(double)>& f,
                          const QuadratureOptions& q = {}, const TailOptions& t = {}) const;

    friend FundamentalPair fundamental_pair(const DiffusionModel& model);

private:
    DiffusionModel model_;
    double wronskian_ = 0.0;
    double m_ = std::numeric_limits<double>::quiet_NaN();
    double n_ = std::numeric_limits<double>::quiet_NaN();
    double trunc_lo_ = 0.0, trunc_hi_ = 0.0;

    struct Sweep;  // dense Riccati sweep data (Generic only)
    std::shared_ptr<const Sweep> psi_sweep_, phi_sweep_;
    std::shared_ptr<const HermiteCurve> log_scale_;  // log S' on the work range (Generic)
};

/// Builds the pair; throws SolverError on Generic sweep failure.
FundamentalPair fundamental_pair(const DiffusionModel& model);

/// Green function G(d, h) = w^{-1} psi(min) phi(max).
double green(const FundamentalPair& pair, double d, double h);

/// E[int_0^inf e^{-rho t} f(D_t^d) dt] as the split Green-kernel quadrature.
double resolvent(const FundamentalPair& pair, const std::function<double(double)>& f, double d,
                 const QuadratureOptions& q = {}, const TailOptions& t = {});

}  // namespace revcap
