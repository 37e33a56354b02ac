#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "galu/types.hpp"

namespace galu::experiments {

/// Runs task(i) for i in [0, n) on up to `threads` workers. Tasks must write
/// only to their own slot; the first exception is rethrown after all workers
/// stop.
template <typename Task>
void parallel_for(Index n, Index threads, Task&& task) {
  const Index workers = std::max<Index>(1, std::min(threads, n));
  if (workers == 1) {
    for (Index i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (Index i = next++; i < n; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace galu::experiments
