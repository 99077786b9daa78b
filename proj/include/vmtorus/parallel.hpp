#pragma once

#include <cstddef>
#include <functional>

namespace vmtorus {

/// Number of worker threads used by parallel_for. Defaults to the hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Calls made from inside a worker run serially, so nested
/// parallel regions never oversubscribe. Results must be written to per-index slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace vmtorus
