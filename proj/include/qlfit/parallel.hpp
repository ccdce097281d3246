#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace qlfit {

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency). Callers own result slots indexed by i, so the output is
// schedule-independent; fn must not throw.
template <typename Fn>
void parallel_for(size_t n, int threads, Fn&& fn) {
  size_t n_threads = threads > 0 ? static_cast<size_t>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, n);
  if (n_threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  for (size_t w = 0; w < n_threads; ++w) {
    workers.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& worker : workers) worker.join();
}

}  // namespace qlfit
