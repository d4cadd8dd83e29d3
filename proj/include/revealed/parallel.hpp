#pragma once

#include <cstddef>
#include <functional>

namespace revealed {

// Worker cap: REVEALED_THREADS when set (minimum 1), else hardware
// concurrency. Results must be written to per-index slots by the caller, so
// output is identical for every thread count.
std::size_t thread_budget();

// Runs fn(i) for i in [0, count). Workers pull indices from a shared
// counter; the first exception is rethrown on the caller thread. Nested
// calls run serially to keep the worker count bounded.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace revealed
