#pragma once

// Minimal fixed-size task runner. Each task writes to its own output, so
// results do not depend on the number of workers or their scheduling.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace ktflow::parallel {

/// Worker cap from KTFLOW_THREADS (0 or unset: hardware concurrency).
inline unsigned thread_cap() {
  static const unsigned cap = [] {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("KTFLOW_THREADS");
    if (env == nullptr || *env == '\0') return hw;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || v < 0) return hw;
    return v == 0 ? hw : static_cast<unsigned>(v);
  }();
  return cap;
}

/// Runs every task; blocks until all have finished. The first exception (by
/// task index) is rethrown on the calling thread.
inline void run_all(std::span<const std::function<void()>> tasks) {
  const unsigned workers =
      std::min<unsigned>(thread_cap(), static_cast<unsigned>(tasks.size()));
  if (workers <= 1) {
    for (const auto& t : tasks) t();
    return;
  }
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(drain);
    drain();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace ktflow::parallel
