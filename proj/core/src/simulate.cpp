#include "revcap/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "revcap/parallel.hpp"
#include "revcap/rng.hpp"

namespace revcap {

void PolicySpec::validate() const {
    if (table.irreversible()) return;  // upper boundary at +inf, band never empty
    const double lo = table.d_lo(), hi = table.d_hi();
    for (int i = 0; i <= 200; ++i) {
        const double d = lo + (hi - lo) * i / 200.0;
        if (!(table.chat_plus(d) + shift_plus < table.chat_minus(d) + shift_minus))
            throw std::domain_error("PolicySpec: shifted boundaries cross near d = " +
                                    std::to_string(d));
    }
}

ReflectResult reflect_step(const PolicySpec& policy, double c_prev, double d_new) {
    ReflectResult r;
    if (policy.mode == PolicySpec::Mode::DoNothing) {
        r.c_new = c_prev;
        return r;
    }
    const double lower = policy.table.chat_plus(d_new) + policy.shift_plus;
    const double upper = policy.table.irreversible()
                             ? kInf
                             : policy.table.chat_minus(d_new) + policy.shift_minus;
    double c = std::max(c_prev, lower);
    c = std::min(c, upper);
    r.c_new = c;
    r.dI_plus = std::max(0.0, c - c_prev);
    r.dI_minus = std::max(0.0, c_prev - c);
    return r;
}

namespace {

struct PathKernelOut {
    double cost = 0.0, invest = 0.0, disinvest = 0.0;
};

PathKernelOut run_path(const PolicySpec& policy, const DiffusionModel& model,
                       const QuadraticCost& cost, double c0, double d0, double dt,
                       std::size_t n_steps, std::uint64_t seed, std::uint64_t path_index,
                       PathDump* dump) {
    PathKernelOut out;
    const double rho = model.rho;
    const bool gbm = model.kind == DiffusionModel::Kind::GBM;
    const double a = gbm ? (model.mu_coef - 0.5 * model.sigma_coef * model.sigma_coef) * dt : 0.0;
    const double b = gbm ? model.sigma_coef * std::sqrt(dt) : 0.0;
    const double sqdt = std::sqrt(dt);
    const double disc_step = std::exp(-rho * dt);

    double d = d0;
    auto first = reflect_step(policy, c0, d0);
    double c = first.c_new;
    out.invest += first.dI_plus;
    out.disinvest += first.dI_minus;
    out.cost += cost.q_plus * first.dI_plus;
    if (first.dI_minus > 0) out.cost += cost.q_minus * first.dI_minus;

    double disc = 1.0;
    double g_prev = running_cost(cost, c, d);
    if (dump) {
        dump->t.push_back(0.0);
        dump->d.push_back(d);
        dump->c.push_back(c);
        dump->dI_plus.push_back(first.dI_plus);
        dump->dI_minus.push_back(first.dI_minus);
    }
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (gbm) {
            d *= std::exp(a + b * normal_at(seed, path_index, k));
        } else {
            d += model.drift(d) * dt + model.vol(d) * sqdt * normal_at(seed, path_index, k);
            if (d <= model.d_min) d = model.d_min + (model.d_min - d);
            if (d >= model.d_max) d = model.d_max - (d - model.d_max);
        }
        const double disc_new = disc * disc_step;
        const auto step = reflect_step(policy, c, d);
        c = step.c_new;
        out.invest += step.dI_plus;
        out.disinvest += step.dI_minus;
        out.cost += disc_new * cost.q_plus * step.dI_plus;
        if (step.dI_minus > 0) out.cost += disc_new * cost.q_minus * step.dI_minus;
        const double g_new = running_cost(cost, c, d);
        out.cost += 0.5 * (disc * g_prev + disc_new * g_new) * dt;
        disc = disc_new;
        g_prev = g_new;
        if (dump) {
            dump->t.push_back((k + 1) * dt);
            dump->d.push_back(d);
            dump->c.push_back(c);
            dump->dI_plus.push_back(step.dI_plus);
            dump->dI_minus.push_back(step.dI_minus);
        }
    }
    return out;
}

}  // namespace

SimResult simulate_policy(const PolicySpec& policy, const DiffusionModel& model,
                          const QuadraticCost& cost, double c0, double d0, double dt,
                          double horizon, std::uint64_t seed, std::uint64_t path_index,
                          PathDump* dump) {
    if (!(dt > 0) || !(horizon > 0))
        throw std::domain_error("simulate_policy: dt, horizon must be positive");
    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12));
    const auto out = run_path(policy, model, cost, c0, d0, dt, n_steps, seed, path_index, dump);
    SimResult r;
    r.discounted_cost = out.cost;
    r.total_invest = out.invest;
    r.total_disinvest = out.disinvest;
    r.n_paths = 1;
    r.horizon = horizon;
    r.dt = dt;
    r.seed = seed;
    return r;
}

SimResult mc_value(const PolicySpec& policy, const DiffusionModel& model,
                   const QuadraticCost& cost, double c0, double d0, double dt, double horizon,
                   std::size_t n_paths, std::uint64_t seed) {
    if (n_paths < 2) throw std::domain_error("mc_value: n_paths >= 2 required");
    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12));
    std::vector<double> costs(n_paths), invests(n_paths), disinvests(n_paths);
    parallel_for(n_paths, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto out =
                run_path(policy, model, cost, c0, d0, dt, n_steps, seed, i, nullptr);
            costs[i] = out.cost;
            invests[i] = out.invest;
            disinvests[i] = out.disinvest;
        }
    });
    SimResult r;
    r.n_paths = n_paths;
    r.horizon = horizon;
    r.dt = dt;
    r.seed = seed;
    const double sum = pairwise_sum(costs);
    r.discounted_cost = sum / n_paths;
    std::vector<double> sq(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        const double dev = costs[i] - r.discounted_cost;
        sq[i] = dev * dev;
    }
    r.std_error = std::sqrt(pairwise_sum(sq) / (n_paths * (n_paths - 1.0)));
    r.total_invest = pairwise_sum(invests) / n_paths;
    r.total_disinvest = pairwise_sum(disinvests) / n_paths;
    return r;
}

double dynkin_payoff(const DiffusionModel& model, const QuadraticCost& cost, double c, double d,
                     const BoundaryTable& table, double dt, double horizon, std::uint64_t seed,
                     std::uint64_t game_index) {
    const double d_lower = table.dhat_minus(c);  // disinvest trigger (P1, pays q-)
    const double d_upper = table.dhat_plus(c);   // invest trigger (P2, pays q+)
    if (d >= d_upper) return -cost.q_plus;
    if (d <= d_lower) return cost.q_minus;
    const double rho = model.rho;
    const bool gbm = model.kind == DiffusionModel::Kind::GBM;
    const double a = gbm ? (model.mu_coef - 0.5 * model.sigma_coef * model.sigma_coef) * dt : 0.0;
    const double b = gbm ? model.sigma_coef * std::sqrt(dt) : 0.0;
    const double sqdt = std::sqrt(dt);
    const double disc_step = std::exp(-rho * dt);
    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12));

    double x = d, disc = 1.0;
    double payoff = 0.0;
    double gc_prev = marginal_cost(cost, c, x);
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (gbm) {
            x *= std::exp(a + b * normal_at(seed, game_index, k));
        } else {
            x += model.drift(x) * dt + model.vol(x) * sqdt * normal_at(seed, game_index, k);
            if (x <= model.d_min) x = model.d_min + (model.d_min - x);
            if (x >= model.d_max) x = model.d_max - (x - model.d_max);
        }
        const double disc_new = disc * disc_step;
        const double gc_new = marginal_cost(cost, c, x);
        payoff += 0.5 * (disc * gc_prev + disc_new * gc_new) * dt;
        if (x <= d_lower) return payoff + cost.q_minus * disc_new;
        if (x >= d_upper) return payoff - cost.q_plus * disc_new;
        disc = disc_new;
        gc_prev = gc_new;
    }
    return payoff;  // truncation: no player stopped
}

DynkinResult dynkin_value(const DiffusionModel& model, const QuadraticCost& cost, double c,
                          double d, const BoundaryTable& table, double dt, double horizon,
                          std::size_t n_games, std::uint64_t seed) {
    std::vector<double> vals(n_games);
    parallel_for(n_games, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            vals[i] = dynkin_payoff(model, cost, c, d, table, dt, horizon, seed, i);
    });
    DynkinResult r;
    r.n_games = n_games;
    r.horizon = horizon;
    r.dt = dt;
    r.seed = seed;
    r.mean = pairwise_sum(vals) / n_games;
    std::vector<double> sq(n_games);
    for (std::size_t i = 0; i < n_games; ++i) {
        const double dev = vals[i] - r.mean;
        sq[i] = dev * dev;
    }
    r.std_error = std::sqrt(pairwise_sum(sq) / (n_games * (n_games - 1.0)));
    return r;
}

std::vector<RankedPolicy> compare_policies(const std::vector<std::pair<std::string, PolicySpec>>& specs,
                                           const DiffusionModel& model, const QuadraticCost& cost,
                                           double c0, double d0, double dt, double horizon,
                                           std::size_t n_paths, std::uint64_t seed) {
    std::vector<RankedPolicy> out;
    out.reserve(specs.size());
    for (const auto& [label, spec] : specs) {
        spec.validate();
        out.push_back({label, mc_value(spec, model, cost, c0, d0, dt, horizon, n_paths, seed)});
    }
    std::stable_sort(out.begin(), out.end(), [](const RankedPolicy& a, const RankedPolicy& b) {
        return a.result.discounted_cost < b.result.discounted_cost;
    });
    return out;
}

double tail_rule_horizon(const DiffusionModel& model, double value_scale, double eps) {
    double rho_eff = model.rho;
    if (model.kind == DiffusionModel::Kind::GBM) {
        rho_eff -= std::max(0.0, 2.0 * model.mu_coef + model.sigma_coef * model.sigma_coef);
    }
    const double s = std::max(value_scale, 1e-12);
    const double e = std::max(eps, 1e-12);
    return std::max(1.0 / model.rho, std::log(100.0 * s / e) / rho_eff);
}

}  // namespace revcap
