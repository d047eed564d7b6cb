#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace vicon {

/// Upper bound on worker threads, from VICON_THREADS (default: hardware).
inline std::size_t thread_cap() {
  static const std::size_t cap = [] {
    if (const char* env = std::getenv("VICON_THREADS")) {
      try {
        const long v = std::stol(env);
        if (v >= 1) return static_cast<std::size_t>(v);
      } catch (...) {
      }
      return std::size_t{1};
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }();
  return cap;
}

/// Runs fn(i) for i in [0, n). Each index is visited by exactly one thread
/// and work is split into contiguous blocks, so results written to slot i
/// do not depend on the thread count. Small ranges run inline.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t min_parallel = 2048) {
  const std::size_t threads = std::min(thread_cap(), n / std::max<std::size_t>(1, min_parallel / 4));
  if (n < min_parallel || threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  const std::size_t block = (n + threads - 1) / threads;
  for (std::size_t t = 1; t < threads; ++t) {
    const std::size_t lo = t * block, hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::size_t i = 0; i < std::min(n, block); ++i) fn(i);
}

}  // namespace vicon
