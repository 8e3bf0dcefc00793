#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace shrinklab {

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static partition of [0, count) across workers. Bodies write results
// into slots indexed by their own iteration, so the reduction order
// (and therefore every float in a report) is independent of the
// worker count.
inline void parallel_for(std::int64_t count, int workers,
                         const std::function<void(std::int64_t begin,
                                                  std::int64_t end)>& body) {
  const int w = resolve_workers(workers);
  if (w <= 1 || count < 2) {
    body(0, count);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  threads.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    const std::int64_t begin = count * t / w;
    const std::int64_t end = count * (t + 1) / w;
    threads.emplace_back([&body, &errors, t, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace shrinklab
