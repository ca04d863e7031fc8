#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace revcap {

/// Worker count: hardware concurrency capped by the REVCAP_THREADS env var.
int worker_count();

/// Runs body(begin, end) over a partition of [0, n). The partition depends on
/// the worker count, so bodies must write to disjoint, index-addressed slots
/// (never accumulate shared state) to stay reproducible.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Pairwise (cascade) summation; deterministic for a fixed input vector
/// regardless of how the entries were produced.
double pairwise_sum(std::span<const double> v);

}  // namespace revcap
