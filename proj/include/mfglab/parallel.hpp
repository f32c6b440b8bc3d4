#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace mfglab {

// Global parallelism degree for Monte-Carlo loops; 0 = hardware concurrency.
int parallel_threads();
void set_parallel_threads(int n);

// Runs fn(i) for i in [0, count). Work items must write only to their own
// slots; outputs are then independent of scheduling, so results do not depend
// on the thread count.
inline void parallel_for(long count, const std::function<void(long)>& fn) {
  int threads = parallel_threads();
  if (threads <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  threads = static_cast<int>(std::min<long>(threads, count));
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= count || failed.load()) break;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          break;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace mfglab
