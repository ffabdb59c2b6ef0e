#pragma once

#include <cstddef>
#include <functional>

namespace lanecast {

/// Worker count: LANECAST_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs task(i) for every i in [0, n). Each index is processed exactly once;
/// callers write results into per-index slots and reduce in index order, so
/// outcomes do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task, std::size_t workers = 0);

}  // namespace lanecast
