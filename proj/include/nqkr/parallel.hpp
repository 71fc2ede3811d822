#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace nqkr {

/// Worker count: NQKR_JOBS if set to a positive integer, else the hardware concurrency.
inline int default_jobs() {
  if (const char* env = std::getenv("NQKR_JOBS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Calls body(i) for i in [0, total) on up to `jobs` threads. Work items are
/// handed out through a shared counter; the first exception stops the pool and
/// is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t total, int jobs, Body&& body) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::exception_ptr failure;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      try {
        body(k);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };

  const int n = std::max(1, std::min(jobs, static_cast<int>(std::min<std::size_t>(total, 1u << 20))));
  {
    std::vector<std::jthread> pool;
    for (int j = 1; j < n; ++j) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace nqkr
