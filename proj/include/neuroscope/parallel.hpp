#pragma once

#include <cstddef>
#include <functional>

namespace neuroscope {

/// Worker count from NEUROSCOPE_THREADS (0 or unset = hardware concurrency).
std::size_t thread_count();

/// Runs body(i) for i in [0, n) across thread_count() workers. Iterations
/// must be independent; the first exception thrown is rethrown on the
/// calling thread after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace neuroscope
