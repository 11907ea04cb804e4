#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace scalereg {

/// Runs fn(i) for i in [0, count). Work items own disjoint output slots and
/// derive their randomness from their index, so the result is identical for
/// every thread count. The first exception thrown by a worker is rethrown.
template <typename F>
void parallel_for(std::size_t count, int threads, F&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t num_workers = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  std::size_t next = 0;
  std::mutex next_mutex;
  for (std::size_t w = 0; w < num_workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(next_mutex);
          if (next >= count) return;
          i = next++;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace scalereg
