#pragma once

#include <cstddef>
#include <functional>

namespace sflr {

/// Worker cap: SFLR_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// runs exactly once; the first exception is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sflr
