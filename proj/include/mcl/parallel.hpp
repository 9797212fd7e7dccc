#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace mcl {

// Worker count: MCL_THREADS if set (>=1), else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("MCL_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

// Runs fn(i) for i in [0, n). Each index is handled exactly once; callers
// write into preallocated slots so reduction order stays deterministic.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(worker_count(), n > 0 ? n : 1);
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mcl
