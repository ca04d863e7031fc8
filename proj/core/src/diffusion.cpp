#include "revcap/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "revcap/errors.hpp"
#include "revcap/rng.hpp"

namespace revcap {

namespace {

// GBM characteristic roots of (1/2) sigma^2 z (z - 1) + mu z - rho = 0.
void gbm_roots(double mu, double sigma, double rho, double& pos, double& neg) {
    const double s2 = sigma * sigma;
    const double b = mu / s2 - 0.5;
    const double disc = std::sqrt(b * b + 2.0 * rho / s2);
    pos = -b + disc;
    neg = -b - disc;
}

}  // namespace

DiffusionModel DiffusionModel::gbm(double mu, double sigma, double rho, double d0) {
    DiffusionModel m;
    m.kind = Kind::GBM;
    m.mu_coef = mu;
    m.sigma_coef = sigma;
    m.d_min = 0.0;
    m.d_max = kInf;
    m.d0 = d0;
    m.rho = rho;
    return m;
}

DiffusionModel DiffusionModel::generic(std::function<double(double)> drift,
                                       std::function<double(double)> vol, double d_min,
                                       double d_max, double rho, double d0, double work_lo,
                                       double work_hi) {
    DiffusionModel m;
    m.kind = Kind::Generic;
    m.drift_fn = std::move(drift);
    m.vol_fn = std::move(vol);
    m.d_min = d_min;
    m.d_max = d_max;
    m.d0 = d0;
    m.rho = rho;
    m.work_lo = work_lo;
    m.work_hi = work_hi;
    return m;
}

double DiffusionModel::drift(double d) const {
    return kind == Kind::GBM ? mu_coef * d : drift_fn(d);
}

double DiffusionModel::vol(double d) const {
    return kind == Kind::GBM ? sigma_coef * d : vol_fn(d);
}

void DiffusionModel::require_interior(double d) const {
    if (!interior(d))
        throw std::domain_error("demand level " + std::to_string(d) +
                                " outside the open state interval");
}

void DiffusionModel::validate() const {
    if (!(d_min < d_max)) throw std::domain_error("d_min must be < d_max");
    if (!(rho > 0)) throw std::domain_error("discount rate rho must be positive");
    if (!interior(d0)) throw std::domain_error("reference point d0 must be interior");
    if (kind == Kind::GBM) {
        if (!(sigma_coef > 0)) throw std::domain_error("GBM volatility must be positive");
        const double bound = std::max(0.0, 2.0 * mu_coef + sigma_coef * sigma_coef);
        if (!(rho > bound))
            throw std::domain_error("GBM requires rho > max(0, 2*mu + sigma^2) = " +
                                    std::to_string(bound));
    } else {
        if (!drift_fn || !vol_fn) throw std::domain_error("Generic model needs drift and vol");
        if (!(work_lo > d_min && work_hi < d_max && work_lo < d0 && d0 < work_hi))
            throw std::domain_error("Generic model needs an interior work range around d0");
        const double lo = work_lo, hi = work_hi;
        for (int i = 0; i <= 64; ++i) {
            const double d = lo + (hi - lo) * i / 64.0;
            if (!(vol_fn(d) > 0))
                throw std::domain_error("sigma(d) must be positive on the state interval (fails near " +
                                        std::to_string(d) + ")");
        }
    }
}

double scale_density(const DiffusionModel& model, double d) {
    model.require_interior(d);
    if (model.kind == DiffusionModel::Kind::GBM) {
        const double expnt = -2.0 * model.mu_coef / (model.sigma_coef * model.sigma_coef);
        return std::pow(d / model.d0, expnt);
    }
    const auto integrand = [&model](double x) {
        const double s = model.vol(x);
        return 2.0 * model.drift(x) / (s * s);
    };
    const double integral = (d >= model.d0) ? adaptive_simpson(integrand, model.d0, d)
                                            : -adaptive_simpson(integrand, d, model.d0);
    return std::exp(-integral);
}

double speed_density(const DiffusionModel& model, double d) {
    model.require_interior(d);
    const double s = model.vol(d);
    return 2.0 / (s * s * scale_density(model, d));
}

SamplePath sample_path(const DiffusionModel& model, double d_start, double dt, double horizon,
                       std::uint64_t seed, std::uint64_t path_index) {
    if (!(dt > 0) || !(horizon > 0)) throw std::domain_error("sample_path: dt, horizon must be > 0");
    model.require_interior(d_start);
    const std::size_t n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12));
    SamplePath path;
    path.seed = seed;
    path.scheme = model.kind == DiffusionModel::Kind::GBM ? SamplePath::Scheme::ExactGBM
                                                          : SamplePath::Scheme::EulerMaruyama;
    path.times.resize(n + 1);
    path.values.resize(n + 1);
    path.times[0] = 0.0;
    path.values[0] = d_start;
    double d = d_start;
    const double sqdt = std::sqrt(dt);
    if (path.scheme == SamplePath::Scheme::ExactGBM) {
        const double a = (model.mu_coef - 0.5 * model.sigma_coef * model.sigma_coef) * dt;
        const double b = model.sigma_coef * sqdt;
        for (std::size_t k = 0; k < n; ++k) {
            d *= std::exp(a + b * normal_at(seed, path_index, k));
            path.times[k + 1] = (k + 1) * dt;
            path.values[k + 1] = d;
        }
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            d += model.drift(d) * dt + model.vol(d) * sqdt * normal_at(seed, path_index, k);
            // Natural boundaries are unattainable; reflect discretization overshoot.
            if (d <= model.d_min) d = model.d_min + (model.d_min - d);
            if (d >= model.d_max) d = model.d_max - (d - model.d_max);
            if (d <= model.d_min || d >= model.d_max)
                d = 0.5 * (std::max(model.d_min, model.work_lo) + std::min(model.d_max, model.work_hi));
            path.times[k + 1] = (k + 1) * dt;
            path.values[k + 1] = d;
        }
    }
    return path;
}

// ---------------------------------------------------------------------------
// Riccati sweeps for the Generic fundamental pair.

struct FundamentalPair::Sweep {
    HermiteCurve logderiv;  // r(d) with exact slopes from the Riccati RHS
    HermiteCurve logvalue;  // int r, anchored so that logvalue(d0) = 0
};

namespace {

struct RkPoint {
    double d, r, rp, I;
};

// RHS of the log-derivative equation r' = 2 (rho - mu r) / sigma^2 - r^2.
double riccati_rhs(const DiffusionModel& m, double d, double r) {
    const double s2 = m.vol(d) * m.vol(d);
    return 2.0 * (m.rho - m.drift(d) * r) / s2 - r * r;
}

// Embedded Cash-Karp RK45 on the state (r, I) with I' = r; adaptive step,
// relative tolerance 1e-10. direction = +1 sweeps up in d, -1 sweeps down.
std::vector<RkPoint> riccati_sweep(const DiffusionModel& m, double from, double to, double r_init) {
    const double dir = to > from ? 1.0 : -1.0;
    const double rtol = 1e-10, atol = 1e-13;
    std::vector<RkPoint> pts;
    double d = from, r = r_init, I = 0.0;
    pts.push_back({d, r, riccati_rhs(m, d, r), I});
    double h = dir * std::max(1e-8, std::abs(to - from) * 1e-6);
    const int max_steps = 4'000'000;
    static const double A[6] = {0.0, 0.2, 0.3, 0.6, 1.0, 0.875};
    static const double B[6][5] = {
        {},
        {0.2},
        {3.0 / 40, 9.0 / 40},
        {0.3, -0.9, 1.2},
        {-11.0 / 54, 2.5, -70.0 / 27, 35.0 / 27},
        {1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592, 253.0 / 4096}};
    static const double C5[6] = {37.0 / 378, 0, 250.0 / 621, 125.0 / 594, 0, 512.0 / 1771};
    static const double C4[6] = {2825.0 / 27648, 0,           18575.0 / 48384,
                                 13525.0 / 55296, 277.0 / 14336, 0.25};
    for (int step = 0; step < max_steps; ++step) {
        if ((to - d) * dir <= 0) break;
        if ((d + h - to) * dir > 0) h = to - d;
        double kr[6], kI[6];
        bool ok = true;
        for (int s = 0; s < 6 && ok; ++s) {
            double rs = r, Is = I;
            for (int j = 0; j < s; ++j) {
                rs += h * B[s][j] * kr[j];
                Is += h * B[s][j] * kI[j];
            }
            const double ds = d + A[s] * h;
            kr[s] = riccati_rhs(m, ds, rs);
            kI[s] = rs;
            if (!std::isfinite(kr[s])) ok = false;
        }
        double r5 = r, I5 = I, r4 = r, I4 = I;
        if (ok) {
            for (int s = 0; s < 6; ++s) {
                r5 += h * C5[s] * kr[s];
                I5 += h * C5[s] * kI[s];
                r4 += h * C4[s] * kr[s];
                I4 += h * C4[s] * kI[s];
            }
        }
        const double sc_r = atol + rtol * std::max(std::abs(r), std::abs(r5));
        const double sc_I = atol + rtol * std::max(std::abs(I), std::abs(I5));
        const double err = ok ? std::max(std::abs(r5 - r4) / sc_r, std::abs(I5 - I4) / sc_I)
                              : 2.0;
        if (err <= 1.0) {
            d += h;
            r = r5;
            I = I5;
            pts.push_back({d, r, riccati_rhs(m, d, r), I});
            if (!std::isfinite(r) || std::abs(I) > 1e4)
                throw SolverError("fundamental_pair: log-derivative sweep overflowed near d = " +
                                  std::to_string(d));
        }
        const double fac = ok ? std::clamp(0.9 * std::pow(err > 0 ? err : 1e-16, -0.2), 0.2, 5.0)
                              : 0.25;
        h *= fac;
        if (std::abs(h) < 1e-14 * (1.0 + std::abs(d)))
            throw SolverError("fundamental_pair: step size underflow near d = " + std::to_string(d) +
                              " (stiff coefficients?)");
    }
    if ((to - d) * dir > 0) throw SolverError("fundamental_pair: sweep did not reach the cutoff");
    return pts;
}

HermiteCurve sweep_curve_r(const std::vector<RkPoint>& pts, bool reverse) {
    std::vector<double> x, y, s;
    const std::size_t n = pts.size();
    x.reserve(n); y.reserve(n); s.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const RkPoint& p = pts[reverse ? n - 1 - i : i];
        x.push_back(p.d);
        y.push_back(p.r);
        s.push_back(p.rp);
    }
    return HermiteCurve(std::move(x), std::move(y), std::move(s));
}

HermiteCurve sweep_curve_I(const std::vector<RkPoint>& pts, bool reverse, double anchor) {
    std::vector<double> x, y, s;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const RkPoint& p = pts[reverse ? n - 1 - i : i];
        x.push_back(p.d);
        y.push_back(p.I - anchor);
        s.push_back(p.r);
    }
    return HermiteCurve(std::move(x), std::move(y), std::move(s));
}

}  // namespace

FundamentalPair fundamental_pair(const DiffusionModel& model) {
    model.validate();
    FundamentalPair pair;
    pair.model_ = model;
    if (model.kind == DiffusionModel::Kind::GBM) {
        gbm_roots(model.mu_coef, model.sigma_coef, model.rho, pair.m_, pair.n_);
        const double s2 = model.sigma_coef * model.sigma_coef;
        const double span = std::max({pair.m_, -pair.n_, std::abs(2.0 * model.mu_coef / s2) + 2.0});
        const double L = std::min(580.0 / span, 300.0);
        pair.trunc_lo_ = model.d0 * std::exp(-L);
        pair.trunc_hi_ = model.d0 * std::exp(L);
        pair.wronskian_ = (pair.m_ - pair.n_) / model.d0;
        return pair;
    }
    // Generic: forward sweep for the increasing solution, backward for the
    // decreasing one, each seeded at the attracting frozen Riccati root.
    const double lo = model.work_lo, hi = model.work_hi;
    auto frozen_root = [&model](double d, bool upper) {
        const double s2 = model.vol(d) * model.vol(d);
        const double mu = model.drift(d);
        const double disc = std::sqrt(mu * mu + 2.0 * model.rho * s2);
        return (upper ? (-mu + disc) : (-mu - disc)) / s2;
    };
    auto up = riccati_sweep(model, lo, hi, frozen_root(lo, true));
    auto down = riccati_sweep(model, hi, lo, frozen_root(hi, false));

    auto sweep_of = [&model](std::vector<RkPoint>&& pts, bool reverse) {
        HermiteCurve r = sweep_curve_r(pts, reverse);
        HermiteCurve I0 = sweep_curve_I(pts, reverse, 0.0);
        const double anchor = I0(model.d0);
        HermiteCurve I = sweep_curve_I(pts, reverse, anchor);
        auto s = std::make_shared<FundamentalPair::Sweep>();
        s->logderiv = std::move(r);
        s->logvalue = std::move(I);
        return s;
    };
    pair.psi_sweep_ = sweep_of(std::move(up), false);
    pair.phi_sweep_ = sweep_of(std::move(down), true);

    // log S'(d) = -int_{d0}^{d} 2 mu / sigma^2, accumulated knot to knot.
    {
        const auto integrand = [&model](double x) {
            const double s = model.vol(x);
            return -2.0 * model.drift(x) / (s * s);
        };
        const int n_knots = 1200;
        std::vector<double> xs(n_knots), ys(n_knots), ss(n_knots);
        for (int i = 0; i < n_knots; ++i) xs[i] = lo + (hi - lo) * i / (n_knots - 1.0);
        QuadratureOptions q;
        q.abs_tol = 1e-13;
        ys[0] = 0.0;
        ss[0] = integrand(xs[0]);
        for (int i = 1; i < n_knots; ++i) {
            ys[i] = ys[i - 1] + adaptive_simpson(integrand, xs[i - 1], xs[i], q);
            ss[i] = integrand(xs[i]);
        }
        HermiteCurve raw(xs, ys, ss);
        const double at_d0 = raw(model.d0);
        for (double& y : ys) y -= at_d0;
        pair.log_scale_ = std::make_shared<HermiteCurve>(std::move(xs), std::move(ys),
                                                         std::move(ss));
    }
    pair.trunc_lo_ = lo;
    pair.trunc_hi_ = hi;
    pair.wronskian_ = pair.psi_sweep_->logderiv(model.d0) - pair.phi_sweep_->logderiv(model.d0);
    return pair;
}

double FundamentalPair::psi(double d) const {
    if (model_.kind == DiffusionModel::Kind::GBM) return std::pow(d / model_.d0, m_);
    return std::exp(psi_sweep_->logvalue(d));
}

double FundamentalPair::psi_prime(double d) const {
    if (model_.kind == DiffusionModel::Kind::GBM)
        return m_ / d * std::pow(d / model_.d0, m_);
    return psi_sweep_->logderiv(d) * psi(d);
}

double FundamentalPair::phi(double d) const {
    if (model_.kind == DiffusionModel::Kind::GBM) return std::pow(d / model_.d0, n_);
    return std::exp(phi_sweep_->logvalue(d));
}

double FundamentalPair::phi_prime(double d) const {
    if (model_.kind == DiffusionModel::Kind::GBM)
        return n_ / d * std::pow(d / model_.d0, n_);
    return phi_sweep_->logderiv(d) * phi(d);
}

double FundamentalPair::psi_second(double d) const {
    const double s2 = model_.vol(d) * model_.vol(d);
    return 2.0 * (model_.rho * psi(d) - model_.drift(d) * psi_prime(d)) / s2;
}

double FundamentalPair::phi_second(double d) const {
    const double s2 = model_.vol(d) * model_.vol(d);
    return 2.0 * (model_.rho * phi(d) - model_.drift(d) * phi_prime(d)) / s2;
}

double FundamentalPair::scale_density(double d) const {
    if (model_.kind == DiffusionModel::Kind::GBM) {
        const double expnt = -2.0 * model_.mu_coef / (model_.sigma_coef * model_.sigma_coef);
        return std::pow(d / model_.d0, expnt);
    }
    return std::exp((*log_scale_)(d));
}

double FundamentalPair::speed_density(double d) const {
    const double s = model_.vol(d);
    return 2.0 / (s * s * scale_density(d));
}

namespace {

// Next point toward a boundary for improper-integral chunking: halve the gap
// to a finite endpoint, double an additive step toward an infinite one.
double next_toward(double p, double boundary, double scale, bool downward) {
    if (std::isfinite(boundary)) return boundary + 0.5 * (p - boundary);
    return downward ? p - scale : p + scale;
}

}  // namespace

double FundamentalPair::integral_left(double d, const std::function<double(double)>& f,
                                      const QuadratureOptions& q, const TailOptions& t) const {
    model_.require_interior(d);
    const auto integrand = [this, &f](double x) { return psi(x) * f(x) * speed_density(x); };
    double total = 0.0;
    double p = std::min(d, trunc_hi_);
    double scale = 0.5 * (1.0 + std::abs(d));
    for (int k = 0; k < t.max_chunks; ++k) {
        double pn = next_toward(p, model_.d_min, scale, true);
        scale *= 2.0;
        if (pn < trunc_lo_) pn = trunc_lo_;
        if (pn < p) total += adaptive_simpson(integrand, pn, p, q);
        p = pn;
        // Exact remaining mass of psi m' below p, from the scale-derivative identity.
        const double tail_mass = psi_prime(p) / (model_.rho * scale_density(p));
        const double probe = 2.0 * std::max({std::abs(f(p)), std::abs(f(0.5 * (p + d))),
                                             std::abs(f(std::min(trunc_hi_, p + scale)))});
        const double tail = probe * tail_mass;
        if (tail <= std::max(t.rel_budget * std::abs(total), 0.5 * q.abs_tol)) return total;
        if (p <= trunc_lo_)
            throw IntegrationError("integral_left: tail estimate " + std::to_string(tail) +
                                   " above budget at the lower cutoff");
    }
    throw IntegrationError("integral_left: tail budget not reached after chunk cap");
}

double FundamentalPair::integral_right(double d, const std::function<double(double)>& f,
                                       const QuadratureOptions& q, const TailOptions& t) const {
    model_.require_interior(d);
    const auto integrand = [this, &f](double x) { return phi(x) * f(x) * speed_density(x); };
    double total = 0.0;
    double p = std::max(d, trunc_lo_);
    double scale = 0.5 * (1.0 + std::abs(d));
    for (int k = 0; k < t.max_chunks; ++k) {
        double pn = next_toward(p, model_.d_max, scale, false);
        scale *= 2.0;
        if (pn > trunc_hi_) pn = trunc_hi_;
        if (pn > p) total += adaptive_simpson(integrand, p, pn, q);
        p = pn;
        const double tail_mass = -phi_prime(p) / (model_.rho * scale_density(p));
        const double probe = 2.0 * std::max({std::abs(f(p)), std::abs(f(0.5 * (p + d))),
                                             std::abs(f(std::max(trunc_lo_, p - scale)))});
        const double tail = probe * tail_mass;
        if (tail <= std::max(t.rel_budget * std::abs(total), 0.5 * q.abs_tol)) return total;
        if (p >= trunc_hi_)
            throw IntegrationError("integral_right: tail estimate " + std::to_string(tail) +
                                   " above budget at the upper cutoff");
    }
    throw IntegrationError("integral_right: tail budget not reached after chunk cap");
}

double green(const FundamentalPair& pair, double d, double h) {
    pair.model().require_interior(d);
    pair.model().require_interior(h);
    const double lo = std::min(d, h), hi = std::max(d, h);
    return pair.psi(lo) * pair.phi(hi) / pair.wronskian();
}

double resolvent(const FundamentalPair& pair, const std::function<double(double)>& f, double d,
                 const QuadratureOptions& q, const TailOptions& t) {
    pair.model().require_interior(d);
    const double left = pair.integral_left(d, f, q, t);
    const double right = pair.integral_right(d, f, q, t);
    return (pair.phi(d) * left + pair.psi(d) * right) / pair.wronskian();
}

}  // namespace revcap
