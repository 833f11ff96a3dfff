#pragma once

#include <cstddef>
#include <functional>

namespace sagopt {

// Number of worker threads used by parallel_for. Defaults to the hardware
// concurrency; 1 runs everything inline. Results never depend on this value.
void set_thread_count(unsigned threads);
[[nodiscard]] unsigned thread_count();

// Runs body(i) for i in [0, n). Work is split into contiguous chunks, one per
// worker. Nested calls from inside a worker run inline. The first exception
// (lowest index) is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace sagopt
