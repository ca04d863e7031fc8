#include "revcap/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "revcap/errors.hpp"
#include "revcap/roots.hpp"

namespace revcap {

namespace {

// Signed integral helper (adaptive Simpson on the oriented interval).
template <class F>
double signed_integral(F&& f, double a, double b, const QuadratureOptions& q) {
    if (a == b) return 0.0;
    return a < b ? adaptive_simpson(f, a, b, q) : -adaptive_simpson(f, b, a, q);
}

double next_toward(double p, double boundary, double& step) {
    const double out = std::isfinite(boundary) ? boundary + 0.5 * (p - boundary)
                                               : (boundary > 0 ? p + step : p - step);
    step *= 2.0;
    return out;
}

void require_reversible(const BoundarySystem& sys, const char* who) {
    if (sys.cost.irreversible())
        throw std::domain_error(std::string(who) + ": needs finite q_minus");
}

}  // namespace

BoundarySystem make_boundary_system(const DiffusionModel& model, const QuadraticCost& cost) {
    BoundarySystem sys;
    sys.model = model;
    sys.pair = fundamental_pair(model);
    sys.cost = cost;
    sys.coeffs = ResolventCoeffs(sys.pair, cost, QuadratureOptions{1e-12, 52}, sys.tail);
    sys.thr = Thresholds(cost, model, sys.pair.trunc_lo(), sys.pair.trunc_hi());
    return sys;
}

double eval_L1(const BoundarySystem& sys, double x, double y, double c) {
    require_reversible(sys, "eval_L1");
    const auto& p = sys.pair;
    const double rq = sys.model.rho * sys.cost.q_plus;
    const auto f = [&](double xi) {
        return p.psi(xi) * (marginal_cost(sys.cost, c, xi) + rq) * p.speed_density(xi);
    };
    const double split = sys.thr.dstar_plus(c);
    double integral;
    if (std::min(x, y) < split && split < std::max(x, y)) {
        integral = signed_integral(f, x, split, sys.quad) + signed_integral(f, split, y, sys.quad);
    } else {
        integral = signed_integral(f, x, y, sys.quad);
    }
    return integral +
           (sys.cost.q_plus + sys.cost.q_minus) * p.psi_prime(x) / p.scale_density(x);
}

double eval_L2(const BoundarySystem& sys, double x, double y, double c) {
    require_reversible(sys, "eval_L2");
    const auto& p = sys.pair;
    const double rq = sys.model.rho * sys.cost.q_minus;
    const auto f = [&](double xi) {
        return p.phi(xi) * (marginal_cost(sys.cost, c, xi) - rq) * p.speed_density(xi);
    };
    const double split = sys.thr.dstar_minus(c);
    double integral;
    if (std::min(x, y) < split && split < std::max(x, y)) {
        integral = signed_integral(f, x, split, sys.quad) + signed_integral(f, split, y, sys.quad);
    } else {
        integral = signed_integral(f, x, y, sys.quad);
    }
    return integral +
           (sys.cost.q_plus + sys.cost.q_minus) * p.phi_prime(y) / p.scale_density(y);
}

double dL1_dx(const BoundarySystem& sys, double x, double c) {
    const auto& p = sys.pair;
    return -p.psi(x) * (marginal_cost(sys.cost, c, x) - sys.model.rho * sys.cost.q_minus) *
           p.speed_density(x);
}

double dL1_dy(const BoundarySystem& sys, double y, double c) {
    const auto& p = sys.pair;
    return p.psi(y) * (marginal_cost(sys.cost, c, y) + sys.model.rho * sys.cost.q_plus) *
           p.speed_density(y);
}

double dL2_dx(const BoundarySystem& sys, double x, double c) {
    const auto& p = sys.pair;
    return -p.phi(x) * (marginal_cost(sys.cost, c, x) - sys.model.rho * sys.cost.q_minus) *
           p.speed_density(x);
}

double dL2_dy(const BoundarySystem& sys, double y, double c) {
    const auto& p = sys.pair;
    return p.phi(y) * (marginal_cost(sys.cost, c, y) + sys.model.rho * sys.cost.q_plus) *
           p.speed_density(y);
}

std::optional<double> inner_root_y(const BoundarySystem& sys, double x, double c) {
    require_reversible(sys, "inner_root_y");
    if (!(c < sys.thr.c_upper_plus_g())) return std::nullopt;
    const auto& p = sys.pair;
    const double rq = sys.model.rho * sys.cost.q_plus;
    const auto integrand = [&](double xi) {
        return p.psi(xi) * (marginal_cost(sys.cost, c, xi) + rq) * p.speed_density(xi);
    };
    // Anchor at the interior maximum of L1(x, .); L1 is positive there and
    // strictly decreasing beyond, so the root (if any) lies to the right.
    const double y0 = std::clamp(sys.thr.dstar_plus(c), std::min(x * (1 + 1e-12), p.trunc_hi()),
                                 p.trunc_hi());
    const double base = eval_L1(sys, x, std::max(y0, x), c);
    const auto f = [&](double y) { return base + signed_integral(integrand, std::max(y0, x), y, sys.quad); };

    double lo, hi, flo, fhi;
    if (base <= 0.0) {
        // Root between x (where L1 = (q+ + q-) psi'(x)/S'(x) > 0) and the anchor.
        lo = x;
        flo = (sys.cost.q_plus + sys.cost.q_minus) * p.psi_prime(x) / p.scale_density(x);
        hi = std::max(y0, x);
        fhi = base;
        if (flo <= 0.0) return std::nullopt;
    } else {
        lo = std::max(y0, x);
        flo = base;
        double step = 0.5 * (1.0 + std::abs(lo));
        double prev = lo, fprev = flo;
        bool bracketed = false;
        for (int k = 0; k < 400; ++k) {
            double nxt = next_toward(prev, sys.model.d_max, step);
            if (nxt > p.trunc_hi()) nxt = p.trunc_hi();
            const double fn = f(nxt);
            if (fn <= 0.0) {
                lo = prev; flo = fprev;
                hi = nxt; fhi = fn;
                bracketed = true;
                break;
            }
            prev = nxt;
            fprev = fn;
            if (nxt >= p.trunc_hi()) break;
        }
        if (!bracketed) return std::nullopt;  // domain truncation hit before a sign change
    }
    double y = brent_root(f, lo, hi, flo, fhi);
    // Newton polish against the closed-form slope until the residual contract.
    for (int it = 0; it < 12; ++it) {
        const double r = f(y);
        if (std::abs(r) <= 0.25 * sys.root_residual_tol) break;
        const double dr = dL1_dy(sys, y, c);
        if (dr == 0.0) break;
        double ynew = y - r / dr;
        if (!(ynew > x) || !(ynew < p.trunc_hi())) break;
        y = ynew;
    }
    if (std::abs(f(y)) > sys.root_residual_tol)
        throw SolverError("inner_root_y: residual above contract at c = " + std::to_string(c));
    return y;
}

namespace {

// Damped 2-D Newton from a warm start; returns false if it wanders out of the
// admissible rectangle or stalls.
bool newton_pair(const BoundarySystem& sys, double c, double& x, double& y, double& r1,
                 double& r2) {
    const double dsm = sys.thr.dstar_minus(c);
    const double dsp = sys.thr.dstar_plus(c);
    const double lo = sys.pair.trunc_lo(), hi = sys.pair.trunc_hi();
    for (int it = 0; it < 40; ++it) {
        r1 = eval_L1(sys, x, y, c);
        r2 = eval_L2(sys, x, y, c);
        if (std::abs(r1) <= 0.25 * sys.root_residual_tol &&
            std::abs(r2) <= 0.25 * sys.root_residual_tol)
            return true;
        const double a11 = dL1_dx(sys, x, c), a12 = dL1_dy(sys, y, c);
        const double a21 = dL2_dx(sys, x, c), a22 = dL2_dy(sys, y, c);
        const double det = a11 * a22 - a12 * a21;
        if (det == 0.0 || !std::isfinite(det)) return false;
        double dx = (-r1 * a22 + r2 * a12) / det;
        double dy = (-r2 * a11 + r1 * a21) / det;
        // damp into the admissible open rectangle
        double lambda = 1.0;
        for (int half = 0; half < 30; ++half) {
            const double xn = x + lambda * dx, yn = y + lambda * dy;
            if (xn > lo && xn < dsm && yn > dsp && yn < hi) {
                x = xn;
                y = yn;
                break;
            }
            lambda *= 0.5;
            if (half == 29) return false;
        }
    }
    r1 = eval_L1(sys, x, y, c);
    r2 = eval_L2(sys, x, y, c);
    return std::abs(r1) <= sys.root_residual_tol && std::abs(r2) <= sys.root_residual_tol;
}

}  // namespace

std::optional<PairSolution> solve_pair(const BoundarySystem& sys, double c,
                                       const PairSolution* hint) {
    if (sys.cost.irreversible()) return std::nullopt;
    if (!(c > sys.thr.c_lower_minus_g() && c < sys.thr.c_upper_plus_g())) return std::nullopt;

    if (hint != nullptr) {
        double x = hint->x, y = hint->y, r1 = 0, r2 = 0;
        const double dsm = sys.thr.dstar_minus(c), dsp = sys.thr.dstar_plus(c);
        x = std::clamp(x, sys.pair.trunc_lo() * 2.0, dsm * (1 - 1e-9));
        y = std::clamp(y, dsp * (1 + 1e-9), sys.pair.trunc_hi() * 0.5);
        if (newton_pair(sys, c, x, y, r1, r2) && y > x) {
            return PairSolution{x, y, std::abs(r1), std::abs(r2)};
        }
    }

    const double dsm = sys.thr.dstar_minus(c);
    const auto outer = [&](double x) -> double {
        const auto y = inner_root_y(sys, x, c);
        if (!y) throw SolverError("solve_pair: inner root vanished during outer solve");
        return eval_L2(sys, x, *y, c);
    };
    // F(x) = L2(x, y*(x)) is > 0 near d_min, strictly decreasing on
    // (d_min, dstar_minus) and <= 0 at dstar_minus.
    double b = dsm, fb = outer(b);
    if (fb > 0.0) {
        // roundoff at the corner; nudge just past the switch point
        const double b2 = std::min(dsm * (1 + 1e-9) + 1e-12, sys.thr.dstar_plus(c));
        const double f2 = outer(b2);
        if (f2 > 0.0) return std::nullopt;
        b = b2;
        fb = f2;
    }
    double step = 0.5 * (1.0 + std::abs(b));
    double a = b, fa = fb;
    bool bracketed = false;
    for (int k = 0; k < 400; ++k) {
        double nxt = next_toward(a, sys.model.d_min, step);
        if (nxt < sys.pair.trunc_lo()) nxt = sys.pair.trunc_lo();
        const double fn = outer(nxt);
        if (fn >= 0.0) {
            b = a; fb = fa;
            a = nxt; fa = fn;
            bracketed = true;
            break;
        }
        a = nxt;
        fa = fn;
        if (nxt <= sys.pair.trunc_lo()) break;
    }
    if (!bracketed) return std::nullopt;

    double x = brent_root(outer, a, b, fa, fb);
    auto y = inner_root_y(sys, x, c);
    if (!y) return std::nullopt;
    double xx = x, yy = *y, r1 = 0, r2 = 0;
    if (!newton_pair(sys, c, xx, yy, r1, r2)) {
        throw SolverError("solve_pair: residual contract not met at c = " + std::to_string(c) +
                          " (|L1| = " + std::to_string(std::abs(r1)) +
                          ", |L2| = " + std::to_string(std::abs(r2)) + ")");
    }
    if (!(yy > xx)) return std::nullopt;
    return PairSolution{xx, yy, std::abs(r1), std::abs(r2)};
}

double chat_plus_onesided(const BoundarySystem& sys, double d) {
    sys.model.require_interior(d);
    const double beta = sys.coeffs.beta(d);
    const double betap = sys.coeffs.beta_prime(d);
    return sys.model.rho *
           (beta - sys.pair.psi(d) / sys.pair.psi_prime(d) * betap - sys.cost.q_plus);
}

double chat_minus_onesided(const BoundarySystem& sys, double d) {
    sys.model.require_interior(d);
    if (sys.cost.irreversible()) return kInf;
    const double beta = sys.coeffs.beta(d);
    const double betap = sys.coeffs.beta_prime(d);
    return sys.model.rho *
           (beta - sys.pair.phi(d) / sys.pair.phi_prime(d) * betap + sys.cost.q_minus);
}

namespace {

std::vector<double> log_or_linear_grid(double lo, double hi, int n, bool positive) {
    std::vector<double> g(n);
    if (positive && lo > 0) {
        const double llo = std::log(lo), lhi = std::log(hi);
        for (int i = 0; i < n; ++i) g[i] = std::exp(llo + (lhi - llo) * i / (n - 1.0));
    } else {
        for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1.0);
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

}  // namespace

BoundaryTable tabulate(const BoundarySystem& sys, const TabulateOptions& opt) {
    BoundaryTable tab;
    tab.irreversible_ = sys.cost.irreversible();
    tab.d_min_ = sys.model.d_min;
    tab.d_max_ = sys.model.d_max;
    tab.c_lower_minus_g_ = sys.thr.c_lower_minus_g();
    tab.c_upper_plus_g_ = sys.thr.c_upper_plus_g();
    const double cl = tab.c_lower_minus_g_, cu = tab.c_upper_plus_g_;

    if (!(opt.c_lo < opt.c_hi))
        throw std::domain_error("tabulate: c_lo < c_hi required");
    if (!(opt.d_lo < opt.d_hi) || !sys.model.interior(opt.d_lo) || !sys.model.interior(opt.d_hi))
        throw std::domain_error("tabulate: interior d_lo < d_hi required");
    tab.d_lo_ = opt.d_lo;
    tab.d_hi_ = opt.d_hi;

    const bool positive_domain = sys.model.d_min >= 0;
    const double eps_j = opt.junction_eps_rel * std::max(1.0, std::isfinite(cl) ? std::abs(cl) : 1.0);

    // --- middle region ---------------------------------------------------
    const bool middle_exists = std::isfinite(cl) ? (cl < cu) : false;
    double junction_plus_d = sys.model.d_max;   // lim_{c v cl} dhat_plus
    double junction_minus_d = sys.model.d_max;  // lim_{c ^ cu} dhat_minus
    if (middle_exists) {
        // capacity nodes: graded toward the lower junction, then uniform
        const double mid_lo = cl + eps_j;
        const double mid_hi = std::isfinite(cu) ? std::min(cu - eps_j, opt.c_hi) : opt.c_hi;
        if (mid_hi > mid_lo) {
            std::vector<double> cs;
            const int n_graded = opt.n_middle / 3;
            const double span = mid_hi - mid_lo;
            for (int i = 0; i < n_graded; ++i) {
                const double frac = std::pow(10.0, -4.0 * (1.0 - i / double(n_graded)));
                cs.push_back(mid_lo + span * frac);
            }
            const int n_uni = opt.n_middle - n_graded;
            for (int i = 0; i < n_uni; ++i)
                cs.push_back(mid_lo + span * (0.05 + 0.95 * i / std::max(1, n_uni - 1)));
            std::sort(cs.begin(), cs.end());
            cs.erase(std::unique(cs.begin(), cs.end()), cs.end());

            PairSolution prev;
            bool have_prev = false;
            for (double c : cs) {
                auto sol = solve_pair(sys, c, have_prev ? &prev : nullptr);
                if (!sol) continue;
                tab.c_grid_.push_back(c);
                tab.x_star_.push_back(sol->x);
                tab.y_star_.push_back(sol->y);
                tab.max_residual_ = std::max({tab.max_residual_, sol->res1, sol->res2});
                prev = *sol;
                have_prev = true;
            }
            if (tab.c_grid_.size() < 4)
                throw SolverError("tabulate: too few middle-region solves succeeded");
        }
        // junction: inner root with the x-term pushed to the lower cutoff
        const double x_edge = std::min(sys.pair.trunc_lo() * 4.0, tab.x_star_.empty()
                                                                      ? sys.pair.trunc_lo() * 4.0
                                                                      : tab.x_star_.front() * 0.5);
        const auto yj = inner_root_y(sys, std::max(x_edge, sys.pair.trunc_lo()), cl + eps_j);
        junction_plus_d = yj ? *yj : (tab.y_star_.empty() ? sys.model.d_max : tab.y_star_.front());
        junction_minus_d = std::isfinite(cu) ? (tab.x_star_.empty() ? sys.model.d_min
                                                                    : tab.x_star_.back())
                                             : sys.model.d_max;
    } else if (tab.irreversible_ || !std::isfinite(cl)) {
        junction_plus_d = sys.model.d_max;  // one-sided formula on all of O
        junction_minus_d = sys.model.d_max;
    }
    tab.junction_plus_d_ = junction_plus_d;
    tab.junction_minus_d_ = junction_minus_d;

    // --- one-sided chat_plus piece (d <= junction_plus_d) ------------------
    {
        const double hi = std::min(opt.d_hi, junction_plus_d);
        const double lo = std::min(opt.d_lo, hi * 0.999);
        auto ds = log_or_linear_grid(lo, hi, opt.n_onesided, positive_domain);
        for (double d : ds) {
            tab.plus_d_.push_back(d);
            tab.plus_c_.push_back(chat_plus_onesided(sys, d));
        }
        // continuity check across the junction before appending middle knots
        if (middle_exists && !tab.y_star_.empty() && junction_plus_d < opt.d_hi) {
            PchipCurve mid_inv(tab.y_star_, tab.c_grid_);
            tab.junction_plus_gap_ =
                std::abs(mid_inv(junction_plus_d) - chat_plus_onesided(sys, junction_plus_d));
            for (std::size_t i = 0; i < tab.y_star_.size(); ++i) {
                if (tab.y_star_[i] > tab.plus_d_.back() * (1 + 1e-10)) {
                    tab.plus_d_.push_back(tab.y_star_[i]);
                    tab.plus_c_.push_back(tab.c_grid_[i]);
                }
            }
        }
        tab.chat_plus_curve_ = PchipCurve(tab.plus_d_, tab.plus_c_);
        tab.chat_plus_floor_c_ = tab.plus_c_.front();
    }

    // --- chat_minus: middle inverse plus the region-3 one-sided piece ------
    if (!tab.irreversible_) {
        if (middle_exists && !tab.x_star_.empty()) {
            for (std::size_t i = 0; i < tab.x_star_.size(); ++i) {
                if (tab.minus_d_.empty() ||
                    tab.x_star_[i] > tab.minus_d_.back() * (1 + 1e-10)) {
                    tab.minus_d_.push_back(tab.x_star_[i]);
                    tab.minus_c_.push_back(tab.c_grid_[i]);
                }
            }
        }
        if (std::isfinite(cu) && junction_minus_d < opt.d_hi) {
            auto ds = log_or_linear_grid(std::max(junction_minus_d, opt.d_lo), opt.d_hi,
                                         opt.n_onesided, positive_domain);
            PchipCurve mid_inv = tab.minus_d_.size() >= 2
                                     ? PchipCurve(tab.minus_d_, tab.minus_c_)
                                     : PchipCurve();
            if (!mid_inv.empty())
                tab.junction_minus_gap_ = std::abs(mid_inv(junction_minus_d) -
                                                   chat_minus_onesided(sys, junction_minus_d));
            for (double d : ds) {
                if (!tab.minus_d_.empty() && d <= tab.minus_d_.back() * (1 + 1e-10)) continue;
                tab.minus_d_.push_back(d);
                tab.minus_c_.push_back(chat_minus_onesided(sys, d));
            }
        }
        if (tab.minus_d_.size() >= 2)
            tab.chat_minus_curve_ = PchipCurve(tab.minus_d_, tab.minus_c_);
    }

    // --- pseudo-inverses ----------------------------------------------------
    tab.dhat_plus_curve_ = PchipCurve(tab.plus_c_, tab.plus_d_);
    if (tab.minus_c_.size() >= 2) tab.dhat_minus_curve_ = PchipCurve(tab.minus_c_, tab.minus_d_);
    return tab;
}

double BoundaryTable::chat_plus(double d) const { return chat_plus_curve_(d); }

double BoundaryTable::chat_minus(double d) const {
    if (irreversible_ || chat_minus_curve_.empty()) return kInf;
    return chat_minus_curve_(d);
}

double BoundaryTable::dhat_plus(double c) const {
    const double d = dhat_plus_curve_(c);  // linear extrapolation off the knot range
    return std::clamp(d, d_min_, d_max_);
}

double BoundaryTable::dhat_minus(double c) const {
    if (irreversible_ || dhat_minus_curve_.empty()) return d_min_;  // sup of empty set
    const auto [cl, cu] = region_splits();
    if (c <= cl) return d_min_;
    (void)cu;
    const double d = dhat_minus_curve_(c);
    return std::clamp(d, d_min_, d_max_);
}

Region classify(const BoundaryTable& table, double c, double d) {
    if (!(d > table.d_min() && d < table.d_max()))
        throw std::domain_error("classify: d outside the open state interval");
    if (c <= table.chat_plus(d)) return Region::Invest;
    if (c >= table.chat_minus(d)) return Region::Disinvest;
    return Region::Continue;
}

}  // namespace revcap
