#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace qmet {

/// Process-wide worker count for parameter sweeps; 0 means hardware default.
inline int& thread_count() {
  static int n = 0;
  return n;
}

/// Runs fn(i) for i in [0, n). Work items must be independent; results should
/// be written into pre-sized slots so aggregation stays ordered.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  int workers = thread_count() > 0
                    ? thread_count()
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace qmet
