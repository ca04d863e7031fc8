#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "revcap/boundary.hpp"

namespace revcap {

/// Reflection policy: clamp capacity into [chat_plus + shift_plus,
/// chat_minus + shift_minus] evaluated at the current demand. Zero shifts give
/// the optimal policy; DoNothing never acts (its cost estimates VHat).
struct PolicySpec {
    BoundaryTable table;
    double shift_plus = 0.0;
    double shift_minus = 0.0;
    enum class Mode { Reflect, DoNothing };
    Mode mode = Mode::Reflect;

    /// Shifted band must stay nonempty over the tabulated demand range.
    void validate() const;
};

struct ReflectResult {
    double c_new = 0.0;
    double dI_plus = 0.0;
    double dI_minus = 0.0;
};

/// Minimal-effort clamp; the increment decomposition has at most one side
/// nonzero (minimal decomposition).
ReflectResult reflect_step(const PolicySpec& policy, double c_prev, double d_new);

struct SimResult {
    double discounted_cost = 0.0;
    double total_invest = 0.0;     // terminal I+
    double total_disinvest = 0.0;  // terminal I-
    std::size_t n_paths = 0;
    double std_error = 0.0;
    double horizon = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
};

struct PathDump {
    std::vector<double> t, d, c, dI_plus, dI_minus;
};

/// Single-path realized functional: trapezoid of e^{-rho t} g plus discounted
/// reflection payments. Deterministic in (seed, path_index).
SimResult simulate_policy(const PolicySpec& policy, const DiffusionModel& model,
                          const QuadraticCost& cost, double c0, double d0, double dt,
                          double horizon, std::uint64_t seed, std::uint64_t path_index = 0,
                          PathDump* dump = nullptr);

/// Monte Carlo mean/SE over independent paths; paths are keyed by index so the
/// estimate is reproducible under any thread partition.
SimResult mc_value(const PolicySpec& policy, const DiffusionModel& model,
                   const QuadraticCost& cost, double c0, double d0, double dt, double horizon,
                   std::size_t n_paths, std::uint64_t seed);

/// One realized Dynkin game at capacity c: saddle hitting strategies
/// sigma* = first t with D <= dhat_minus(c) (stop payment +q-),
/// tau*   = first t with D >= dhat_plus(c)  (stop payment -q+),
/// running payoff integral of e^{-rho t} g_c(c, D_t); horizon truncation
/// counts as no player stopping.
double dynkin_payoff(const DiffusionModel& model, const QuadraticCost& cost, double c, double d,
                     const BoundaryTable& table, double dt, double horizon, std::uint64_t seed,
                     std::uint64_t game_index = 0);

struct DynkinResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_games = 0;
    double horizon = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
};

DynkinResult dynkin_value(const DiffusionModel& model, const QuadraticCost& cost, double c,
                          double d, const BoundaryTable& table, double dt, double horizon,
                          std::size_t n_games, std::uint64_t seed);

struct RankedPolicy {
    std::string label;
    SimResult result;
};

/// Runs every spec with common random numbers and returns the table sorted by
/// estimated cost (cheapest first).
std::vector<RankedPolicy> compare_policies(const std::vector<std::pair<std::string, PolicySpec>>& specs,
                                           const DiffusionModel& model, const QuadraticCost& cost,
                                           double c0, double d0, double dt, double horizon,
                                           std::size_t n_paths, std::uint64_t seed);

/// Horizon truncation rule: e^{-rho_eff T} S < 0.01 eps with the effective
/// decay rate rho - max(0, 2 mu + sigma^2) for GBM (the quadratic cost grows
/// with the second moment) and rho otherwise.
double tail_rule_horizon(const DiffusionModel& model, double value_scale, double eps);

}  // namespace revcap
