#pragma once

#include <cstddef>
#include <functional>

namespace hdc {

// Worker count used when a call passes threads = 0. Initialized from the
// HESTON_DEEPCAL_THREADS environment variable, else hardware concurrency.
std::size_t default_threads();
void set_default_threads(std::size_t n);

// Splits [0, n) into contiguous chunks and runs body(begin, end) on up to
// `threads` workers. Callers write results into per-index slots so output
// never depends on the worker count. The first exception thrown by any chunk
// is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace hdc
