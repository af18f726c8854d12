#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dvar {

/// Resolves a user thread count: 0 means "all logical cores".
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs body(begin, end) over contiguous chunks of [0, n).
///
/// Chunk boundaries depend only on (n, threads). The first exception thrown
/// by any chunk is rethrown on the calling thread after all chunks join.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2) {
    if (n > 0) body(std::size_t{0}, n);
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(threads, n);
  const std::size_t step = (n + chunks - 1) / chunks;
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = c * step;
    const std::size_t end = std::min(n, begin + step);
    if (begin >= end) break;
    workers.emplace_back([&, c, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace dvar
