#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace floq {

// FLOQUET_AP_THREADS caps the worker count; unset means hardware concurrency.
inline int worker_count(int jobs) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* cap = std::getenv("FLOQUET_AP_THREADS")) {
    int v = std::atoi(cap);
    if (v >= 1) n = std::min(n, v);
  }
  return std::max(1, std::min(n, jobs));
}

// Runs f(i) for i in [0, jobs). Results must land in preallocated slots
// indexed by i so the schedule never affects the output. The first exception
// is rethrown in the calling thread after all workers drain.
template <class F>
void parallel_for(int jobs, F&& f) {
  if (jobs <= 0) return;
  int workers = worker_count(jobs);
  if (workers <= 1) {
    for (int i = 0; i < jobs; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= jobs) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace floq
