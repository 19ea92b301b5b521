#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace conemaflow {

// Worker count: CONEMAFLOW_THREADS if set, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* s = std::getenv("CONEMAFLOW_THREADS")) {
    const long v = std::strtol(s, nullptr, 10);
    if (v > 0) return unsigned(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs f(i) for i in [0, n) on up to `threads` workers. Task order does not affect results
// as long as f writes only to slot i. The first exception is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t n, Fn&& f, unsigned threads = 0) {
  if (threads == 0) threads = worker_count();
  threads = unsigned(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lk(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace conemaflow
