#pragma once

#include <cstddef>
#include <functional>

namespace hetbelief {

/// Worker count: HETBELIEF_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. Work is
/// split into contiguous blocks; callers write results into per-index slots
/// and reduce afterwards so results do not depend on the thread count.
/// The first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace hetbelief
