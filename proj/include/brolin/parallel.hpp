#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace brolin {

/// Runs f(i) for i in [0, n) on up to `workers` threads. Each index is
/// handled exactly once; callers write results into slot i so the output
/// does not depend on scheduling. If any call throws, the exception from
/// the smallest failing index is rethrown after all threads join.
template <class F>
void parallel_for(std::size_t n, int workers, F&& f) {
  const std::size_t w = std::clamp<std::size_t>(workers < 1 ? 1 : static_cast<std::size_t>(workers), 1, std::max<std::size_t>(n, 1));
  std::size_t failed_index = n;
  std::exception_ptr failure;
  std::mutex mu;
  auto record = [&](std::size_t i) {
    std::lock_guard lock(mu);
    if (i < failed_index) {
      failed_index = i;
      failure = std::current_exception();
    }
  };
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        f(i);
      } catch (...) {
        record(i);
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    constexpr std::size_t kChunk = 16;
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t start = next.fetch_add(kChunk);
          if (start >= n) return;
          const std::size_t stop = std::min(n, start + kChunk);
          for (std::size_t i = start; i < stop; ++i) {
            try {
              f(i);
            } catch (...) {
              record(i);
            }
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace brolin
