#pragma once

#include <string>
#include <vector>

#include "revcap/cost.hpp"
#include "revcap/diffusion.hpp"

namespace revcap {

struct NumericsSpec {
    double c_lo = -5.0, c_hi = 20.0;
    int c_points = 201;
    double d_lo = 0.25, d_hi = 40.0;
    int d_points = 200;
    double dt = 1e-3;
    double horizon = 0.0;  // 0 = auto (tail rule)
    long n_paths = 100000;
    std::uint64_t seed = 1;
    double tolerance = 1e-3;
    int n_middle = 81;
    int n_onesided = 240;
    int grid = 100;  // residual grid per axis
};

/// Parsed and validated problem instance. Cost presets are spelled
/// identity | square | affine A B | power P in the config.
struct ProblemSpec {
    DiffusionModel model;
    QuadraticCost cost;
    NumericsSpec num;
    std::vector<std::string> warnings;
    std::string cost_alpha0_desc, cost_beta0_desc;
};

/// Flat block-structured config file; throws ConfigError with a line anchor on
/// parse failures and names the violated assumption on validation failures.
ProblemSpec parse_config(const std::string& path);
ProblemSpec parse_config_text(const std::string& text);

}  // namespace revcap
