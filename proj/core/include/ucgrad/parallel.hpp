#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace ucgrad {

// Static-partition parallel loop. Each index is visited exactly once; callers
// write results into index-owned slots and reduce sequentially afterwards, so
// results never depend on the worker count. The first exception (by index) is
// rethrown.
inline void parallel_for(long n, int workers, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  const int w = static_cast<int>(std::min<long>(workers, n));
  std::vector<std::exception_ptr> errs(static_cast<size_t>(n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(w));
  for (int t = 0; t < w; ++t) {
    const long lo = n * t / w;
    const long hi = n * (t + 1) / w;
    pool.emplace_back([&, lo, hi] {
      for (long i = lo; i < hi; ++i) {
        try {
          fn(i);
        } catch (...) {
          errs[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace ucgrad
