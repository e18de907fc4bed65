#pragma once

#include <cstddef>
#include <functional>

namespace rqlab {

/// Worker cap: RQHD_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
std::size_t worker_count();

/// Runs fn(0) .. fn(n-1) on up to worker_count() threads. Each index is
/// processed exactly once, so results written per index do not depend on the
/// thread count. If several calls throw, the exception of the lowest index is
/// rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace rqlab
