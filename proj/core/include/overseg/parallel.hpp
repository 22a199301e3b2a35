#pragma once

#include <cstddef>
#include <functional>

namespace overseg {

/// Worker count from OVERSEG_THREADS, else hardware concurrency (>= 1).
int default_thread_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split into
/// contiguous index ranges; callers must write results into per-index slots
/// and reduce them in index order so output never depends on `threads`.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace overseg
