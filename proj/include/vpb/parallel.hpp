#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace vpb {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Static-chunked parallel loop over [0, n). Results must be written to
/// per-index slots by the caller so the outcome is independent of the
/// thread count.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::min(resolve_threads(threads), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([=, &body] {
      for (int i = t; i < n; i += threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace vpb
