#include "revcap/value.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "revcap/errors.hpp"

namespace revcap {

namespace {

struct EdsResult {
    double a_prime, b_prime, a_second, b_second;
};

// First derivatives from the C1 fit, second derivatives from v_cc = 0 at both
// boundaries (the c-derivative of v_c = -q+/q- along the boundary curves,
// with the mixed term killed by the second-order smooth fit).
EdsResult eds_at(const FundamentalPair& pair, double rho, double q_plus, double q_minus,
                 double vc_x, double vc_y, double x, double y) {
    const double px = pair.psi(x), py = pair.psi(y);
    const double fx = pair.phi(x), fy = pair.phi(y);
    const double den = py * fx - fy * px;
    if (std::abs(den) < 1e-14 * (std::abs(py * fx) + std::abs(fy * px)))
        throw SolverError("coefficient solve: degenerate psi/phi denominator");
    EdsResult r;
    r.a_prime = (fx * (-vc_y - q_plus) - fy * (q_minus - vc_x)) / den;
    r.b_prime = (py * (q_minus - vc_x) - px * (-q_plus - vc_y)) / den;
    r.a_second = (fy - fx) / (rho * den);
    r.b_second = (px - py) / (rho * den);
    return r;
}

std::vector<double> log_grid(double lo, double hi, int n, bool positive) {
    std::vector<double> g(n);
    if (positive && lo > 0) {
        const double a = std::log(lo), b = std::log(hi);
        for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1.0));
    } else {
        for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1.0);
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

struct Knot {
    double c, fp, fpp;
};

void append_strict(std::vector<Knot>& v, Knot k) {
    if (!v.empty() && k.c <= v.back().c + 1e-12 * (1.0 + std::abs(v.back().c))) return;
    v.push_back(k);
}

}  // namespace

std::pair<double, double> coeff_derivatives(const BoundarySystem& sys, const BoundaryTable& table,
                                            double c) {
    const auto [cl, cu] = table.region_splits();
    if (!(c > cl && c < cu))
        throw std::domain_error("coeff_derivatives: c outside the middle region");
    PairSolution hint;
    const double rho = sys.model.rho;
    if (table.has_middle()) {
        hint.x = PchipCurve(table.c_grid(), table.x_star())(c);
        hint.y = PchipCurve(table.c_grid(), table.y_star())(c);
    }
    auto sol = solve_pair(sys, c, table.has_middle() ? &hint : nullptr);
    if (!sol) throw SolverError("coeff_derivatives: boundary solve failed");
    const double vcx = vhat_c(sys.coeffs, rho, c, sol->x);
    const double vcy = vhat_c(sys.coeffs, rho, c, sol->y);
    const auto r = eds_at(sys.pair, rho, sys.cost.q_plus, sys.cost.q_minus, vcx, vcy, sol->x,
                          sol->y);
    return {r.a_prime, r.b_prime};
}

ValueFunction build_value(const BoundarySystem& sys, const BoundaryTable& table,
                          const ValueOptions& opt) {
    ValueFunction vf;
    vf.model_ = sys.model;
    vf.pair_ = sys.pair;
    vf.table_ = table;
    vf.cost_ = sys.cost;
    vf.q_plus_ = sys.cost.q_plus;
    vf.q_minus_ = sys.cost.q_minus;
    vf.fd_step_rel_ = opt.fd_step_rel;

    const double rho = sys.model.rho;
    const bool positive = sys.model.d_min >= 0;
    const auto [cl, cu] = table.region_splits();

    // --- coefficient caches over the demand coverage -----------------------
    const double cov_lo = std::max(table.d_lo() / 4.0, sys.pair.trunc_lo() * 2.0);
    const double cov_hi = std::min(table.d_hi() * 4.0, sys.pair.trunc_hi() / 2.0);
    vf.cov_lo_ = cov_lo;
    vf.cov_hi_ = cov_hi;
    {
        const auto ds = log_grid(cov_lo, cov_hi, opt.n_cache_nodes, positive);
        std::vector<double> a(ds.size()), ap(ds.size()), b(ds.size()), bp(ds.size()),
            bpp(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const double d = ds[i];
            const double l_b = sys.pair.integral_left(d, sys.cost.beta0, sys.quad, sys.tail);
            const double r_b = sys.pair.integral_right(d, sys.cost.beta0, sys.quad, sys.tail);
            const double l_a = sys.pair.integral_left(d, sys.cost.alpha0, sys.quad, sys.tail);
            const double r_a = sys.pair.integral_right(d, sys.cost.alpha0, sys.quad, sys.tail);
            const double w = sys.pair.wronskian();
            b[i] = (sys.pair.phi(d) * l_b + sys.pair.psi(d) * r_b) / w;
            bp[i] = (sys.pair.phi_prime(d) * l_b + sys.pair.psi_prime(d) * r_b) / w;
            a[i] = (sys.pair.phi(d) * l_a + sys.pair.psi(d) * r_a) / w;
            ap[i] = (sys.pair.phi_prime(d) * l_a + sys.pair.psi_prime(d) * r_a) / w;
            const double s2 = sys.model.vol(d) * sys.model.vol(d);
            bpp[i] = 2.0 * (rho * b[i] - sys.model.drift(d) * bp[i] - sys.cost.beta0(d)) / s2;
        }
        vf.alpha_curve_ = HermiteCurve(ds, a, ap);
        vf.beta_curve_ = HermiteCurve(ds, b, bp);
        vf.beta_prime_curve_ = HermiteCurve(ds, bp, bpp);
    }
    auto chat_plus_exact = [&](double d) {
        return rho * (vf.beta_curve_(d) -
                      sys.pair.psi(d) / sys.pair.psi_prime(d) * vf.beta_prime_curve_(d) -
                      sys.cost.q_plus);
    };
    auto chat_minus_exact = [&](double d) {
        return rho * (vf.beta_curve_(d) -
                      sys.pair.phi(d) / sys.pair.phi_prime(d) * vf.beta_prime_curve_(d) +
                      sys.cost.q_minus);
    };

    // --- knot assembly ------------------------------------------------------
    const double jp = table.junction_plus_d();   // one-sided chat_plus applies below
    const double jm = table.junction_minus_d();  // one-sided chat_minus applies above
    const bool middle = table.has_middle();

    std::vector<Knot> a_knots, b_knots;
    std::vector<double> mid_c, mid_x, mid_y, d2_c, d2_d;

    // region 2: parameterize by demand along the one-sided invest boundary
    {
        const double top = std::isfinite(jp) ? std::min(jp, cov_hi) : cov_hi;
        const auto ds = log_grid(cov_lo, top, opt.n_coeff_nodes, positive);
        for (double d : ds) {
            const double c = chat_plus_exact(d);
            append_strict(a_knots, {c, vf.beta_prime_curve_(d) / sys.pair.psi_prime(d),
                                    -1.0 / (rho * sys.pair.psi(d))});
            d2_c.push_back(c);
            d2_d.push_back(d);
        }
    }

    // middle region: solved nodes; exact seam knots at both junctions
    if (middle) {
        const double y0 = jp;
        if (std::isfinite(cl) && std::isfinite(y0) && y0 < cov_hi) {
            // seam: A' continuous across cl with the region-2 formula at y0
            append_strict(a_knots, {cl, vf.beta_prime_curve_(y0) / sys.pair.psi_prime(y0),
                                    -1.0 / (rho * sys.pair.psi(y0))});
        }
        b_knots.push_back({cl, 0.0, 0.0});  // B(cl) = 0 with flat tangency

        const double need_hi =
            std::max({opt.c_hi, table.plus_knots_c().empty() ? -kInf : table.plus_knots_c().back(),
                      table.minus_knots_c().empty() ? -kInf : table.minus_knots_c().back()});
        const double mid_hi = std::isfinite(cu) ? cu : need_hi;
        // graded nodes toward cl, uniform through the bulk
        std::vector<double> cs;
        const double span = mid_hi - cl;
        for (int i = 0; i < opt.n_coeff_nodes / 3; ++i) {
            const double f = std::pow(10.0, -5.0 + 5.0 * i / (opt.n_coeff_nodes / 3.0));
            cs.push_back(cl + span * std::min(f, 0.05));
        }
        for (int i = 0; i <= 2 * opt.n_coeff_nodes / 3; ++i)
            cs.push_back(cl + span * (0.05 + 0.95 * i / (2.0 * opt.n_coeff_nodes / 3.0)));
        std::sort(cs.begin(), cs.end());
        cs.erase(std::unique(cs.begin(), cs.end()), cs.end());

        // VHat_c from the cache inside the coverage window, live quadrature outside
        const auto vhat_c_at = [&](double c, double d) {
            if (d >= cov_lo && d <= cov_hi) return c / rho - vf.beta_curve_(d);
            return c / rho - sys.coeffs.beta(d);
        };
        PairSolution prev;
        bool have = false;
        for (double c : cs) {
            if (!(c > cl && c < cu)) continue;
            auto sol = solve_pair(sys, c, have ? &prev : nullptr);
            if (!sol) continue;
            prev = *sol;
            have = true;
            const auto r = eds_at(sys.pair, rho, sys.cost.q_plus, sys.cost.q_minus,
                                  vhat_c_at(c, sol->x), vhat_c_at(c, sol->y), sol->x, sol->y);
            append_strict(a_knots, {c, r.a_prime, r.a_second});
            append_strict(b_knots, {c, r.b_prime, r.b_second});
            mid_c.push_back(c);
            mid_x.push_back(sol->x);
            mid_y.push_back(sol->y);
        }
        if (std::isfinite(cu)) {
            append_strict(a_knots, {cu, 0.0, 0.0});  // A(cu) = 0 with flat tangency
            const double xj = jm;
            if (std::isfinite(xj) && xj > cov_lo)
                append_strict(b_knots, {cu, vf.beta_prime_curve_(xj) / sys.pair.phi_prime(xj),
                                        -1.0 / (rho * sys.pair.phi(xj))});
        } else {
            // extension toward the +inf anchor by doubling nodes
            double c_ext = std::max(mid_hi, cl + span);
            for (int k = 0; k < 22 && have; ++k) {
                c_ext *= 2.0;
                auto sol = solve_pair(sys, c_ext, &prev);
                if (!sol) break;
                prev = *sol;
                const auto r = eds_at(sys.pair, rho, sys.cost.q_plus, sys.cost.q_minus,
                                      vhat_c_at(c_ext, sol->x), vhat_c_at(c_ext, sol->y), sol->x,
                                      sol->y);
                append_strict(a_knots, {c_ext, r.a_prime, r.a_second});
                append_strict(b_knots, {c_ext, r.b_prime, r.b_second});
                if (std::abs(r.a_prime) * c_ext < 1e-15) break;
            }
        }
    } else if (!std::isfinite(cu)) {
        // irreversible-style: extend the region-2 parameterization by doubling d
        double d_ext = cov_hi;
        for (int k = 0; k < 26; ++k) {
            d_ext *= 2.0;
            if (d_ext >= sys.pair.trunc_hi() / 4.0) break;
            const double l_b = sys.pair.integral_left(d_ext, sys.cost.beta0, sys.quad, sys.tail);
            const double r_b = sys.pair.integral_right(d_ext, sys.cost.beta0, sys.quad, sys.tail);
            const double w = sys.pair.wronskian();
            const double beta = (sys.pair.phi(d_ext) * l_b + sys.pair.psi(d_ext) * r_b) / w;
            const double betap =
                (sys.pair.phi_prime(d_ext) * l_b + sys.pair.psi_prime(d_ext) * r_b) / w;
            const double c = rho * (beta - sys.pair.psi(d_ext) / sys.pair.psi_prime(d_ext) * betap -
                                    sys.cost.q_plus);
            append_strict(a_knots, {c, betap / sys.pair.psi_prime(d_ext),
                                    -1.0 / (rho * sys.pair.psi(d_ext))});
            if (std::abs(betap / sys.pair.psi_prime(d_ext)) * std::abs(c) < 1e-15) break;
        }
    } else if (std::isfinite(cu)) {
        append_strict(a_knots, {cu, 0.0, 0.0});
    }

    // region 3: one-sided disinvest boundary parameterized by demand
    if (!sys.cost.irreversible() && std::isfinite(cu) && std::isfinite(jm) && jm < cov_hi) {
        const auto ds = log_grid(std::max(jm, cov_lo), cov_hi, opt.n_coeff_nodes, positive);
        for (double d : ds) {
            const double c = chat_minus_exact(d);
            append_strict(b_knots, {c, vf.beta_prime_curve_(d) / sys.pair.phi_prime(d),
                                    -1.0 / (rho * sys.pair.phi(d))});
        }
    }

    // --- assemble curves ------------------------------------------------------
    {
        std::vector<double> xs, fps, fpps;
        for (const auto& k : a_knots) {
            xs.push_back(k.c);
            fps.push_back(k.fp);
            fpps.push_back(k.fpp);
        }
        if (xs.size() < 2) throw SolverError("build_value: too few A-curve knots");
        vf.A_ = CoeffCurve(xs, fps, fpps, 0.0, CoeffCurve::Extension::Extend,
                           CoeffCurve::Extension::Hold);
        double shift;
        if (std::isfinite(cu)) {
            shift = -vf.A_.value(cu);
        } else {
            // measured-ratio geometric tail beyond the last doubling node
            const std::size_t n = xs.size();
            const double i1 = vf.A_.value(xs[n - 1]) - vf.A_.value(xs[n - 2]);
            const double i2 = n >= 3 ? vf.A_.value(xs[n - 2]) - vf.A_.value(xs[n - 3]) : 0.0;
            double tail = 0.0;
            if (i2 != 0.0) {
                const double r = i1 / i2;
                if (r > 0 && r < 0.95) tail = i1 * r / (1.0 - r);
            }
            shift = -(vf.A_.value_back() + tail);
        }
        vf.A_.shift_values(shift);
    }
    if (!b_knots.empty() && b_knots.size() >= 2 && !sys.cost.irreversible()) {
        std::vector<double> xs, fps, fpps;
        for (const auto& k : b_knots) {
            xs.push_back(k.c);
            fps.push_back(k.fp);
            fpps.push_back(k.fpp);
        }
        vf.B_ = CoeffCurve(xs, fps, fpps, 0.0, CoeffCurve::Extension::Hold,
                           CoeffCurve::Extension::Extend);
        vf.B_zero_ = false;
    }

    if (!mid_c.empty() && mid_c.size() >= 2) {
        vf.xstar_of_c_ = PchipCurve(mid_c, mid_x);
        vf.ystar_of_c_ = PchipCurve(mid_c, mid_y);
        vf.mid_lo_ = mid_c.front();
        vf.mid_hi_ = mid_c.back();
    }
    if (d2_c.size() >= 2) vf.dplus_of_c_ = PchipCurve(d2_c, d2_d);
    return vf;
}

double ValueFunction::vhat(double c, double d) const {
    return 0.5 * (c * c / model_.rho - 2.0 * beta_curve_(d) * c + alpha_curve_(d));
}

double ValueFunction::vhat_c(double c, double d) const {
    return c / model_.rho - beta_curve_(d);
}

double ValueFunction::continuation_value(double c, double d) const {
    return A_.value(c) * pair_.psi(d) + B(c) * pair_.phi(d) + vhat(c, d);
}

double ValueFunction::z_plus(double d) const {
    const double cb = table_.chat_plus(d);
    return continuation_value(cb, d) + q_plus_ * cb;
}

double ValueFunction::z_minus(double d) const {
    const double cb = table_.chat_minus(d);
    if (!std::isfinite(cb)) throw std::domain_error("z_minus: chat_minus infinite at this demand");
    return continuation_value(cb, d) - q_minus_ * cb;
}

double ValueFunction::value(double c, double d) const {
    switch (region(c, d)) {
        case Region::Invest:
            return z_plus(d) - q_plus_ * c;
        case Region::Disinvest:
            return z_minus(d) + q_minus_ * c;
        case Region::Continue:
        default:
            return continuation_value(c, d);
    }
}

double ValueFunction::value_c(double c, double d) const {
    switch (region(c, d)) {
        case Region::Invest:
            return -q_plus_;
        case Region::Disinvest:
            return q_minus_;
        case Region::Continue:
        default:
            return A_.derivative(c) * pair_.psi(d) + B_prime(c) * pair_.phi(d) + vhat_c(c, d);
    }
}

double ValueFunction::vi_residual(double c, double d) const {
    const Region reg = region(c, d);
    const double vc = value_c(c, d);
    const double r_invest = -vc - q_plus_;
    const double r_disinvest = std::isfinite(q_minus_) ? vc - q_minus_ : -kInf;

    double h = fd_step_rel_ * (1.0 + std::abs(d));
    // confine the stencil to this point's region (and the coverage window)
    int offset = 0;  // index shift: stencil points d + (k + offset) h, k = -2..2
    for (int attempt = 0; attempt < 4; ++attempt) {
        bool left_ok = true, right_ok = true;
        for (int k = 1; k <= 2; ++k) {
            const double dl = d - k * h, dr = d + k * h;
            if (!(dl > cov_lo_) || region(c, dl) != reg) left_ok = false;
            if (!(dr < cov_hi_) || region(c, dr) != reg) right_ok = false;
        }
        if (left_ok && right_ok) {
            offset = 0;
            break;
        }
        if (right_ok) {
            bool ok = true;
            for (int k = 1; k <= 4; ++k)
                if (!(d + k * h < cov_hi_) || region(c, d + k * h) != reg) ok = false;
            if (ok) {
                offset = 2;
                break;
            }
        }
        if (left_ok) {
            bool ok = true;
            for (int k = 1; k <= 4; ++k)
                if (!(d - k * h > cov_lo_) || region(c, d - k * h) != reg) ok = false;
            if (ok) {
                offset = -2;
                break;
            }
        }
        h *= 0.25;  // the region is thin here; shrink and retry
    }
    double f[5];
    for (int k = 0; k < 5; ++k) f[k] = value(c, d + (k - 2 + offset) * h);
    double vd, vdd;
    if (offset == 0) {
        vd = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h);
        vdd = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h);
    } else if (offset == 2) {  // forward stencil, f[0] = v(c, d)
        vd = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h);
        vdd = (35 * f[0] - 104 * f[1] + 114 * f[2] - 56 * f[3] + 11 * f[4]) / (12 * h * h);
    } else {  // backward stencil, f[4] = v(c, d)
        vd = (25 * f[4] - 48 * f[3] + 36 * f[2] - 16 * f[1] + 3 * f[0]) / (12 * h);
        vdd = (35 * f[4] - 104 * f[3] + 114 * f[2] - 56 * f[1] + 11 * f[0]) / (12 * h * h);
    }
    const double v_here = offset == 0 ? f[2] : (offset == 2 ? f[0] : f[4]);
    const double r_ode = model_.rho * v_here - model_.drift(d) * vd -
                         0.5 * model_.vol(d) * model_.vol(d) * vdd -
                         running_cost(cost_, c, d);
    return std::max({r_ode, r_invest, r_disinvest});
}

std::pair<double, double> ValueFunction::smooth_fit_residual(double c) const {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double at_minus = nan, at_plus = nan;
    if (c > mid_lo_ && c < mid_hi_) {
        const double x = xstar_of_c_(c), y = ystar_of_c_(c);
        at_minus = A_prime(c) * pair_.psi_prime(x) + B_prime(c) * pair_.phi_prime(x) -
                   beta_prime_curve_(x);
        at_plus = A_prime(c) * pair_.psi_prime(y) + B_prime(c) * pair_.phi_prime(y) -
                  beta_prime_curve_(y);
        return {at_minus, at_plus};
    }
    if (!dplus_of_c_.empty() && c <= mid_lo_) {
        const double d = dplus_of_c_(c);
        at_plus = A_prime(c) * pair_.psi_prime(d) + B_prime(c) * pair_.phi_prime(d) -
                  beta_prime_curve_(d);
    }
    return {at_minus, at_plus};
}

double ValueFunction::x_star_at(double c) const {
    if (xstar_of_c_.empty()) throw std::domain_error("x_star_at: no middle region");
    return xstar_of_c_(c);
}

double ValueFunction::y_star_at(double c) const {
    if (ystar_of_c_.empty()) throw std::domain_error("y_star_at: no middle region");
    return ystar_of_c_(c);
}

}  // namespace revcap
