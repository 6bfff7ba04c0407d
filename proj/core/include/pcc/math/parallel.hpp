#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pcc::math {

// Process-wide worker cap, set from the CLI --threads flag. 0 = hardware.
inline int& thread_limit() {
  static int limit = 0;
  return limit;
}

inline int effective_threads() {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int cap = thread_limit();
  int n = (cap > 0) ? cap : (hw > 0 ? hw : 1);
  return std::max(1, n);
}

// Runs fn(block_index, begin, end) over fixed-size blocks of [0, n).
// The block partition depends only on n and block_size, never on the thread
// count, so any per-block state (RNG streams, partial sums) is deterministic.
inline void parallel_for_blocks(
    std::size_t n, std::size_t block_size,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  block_size = std::max<std::size_t>(1, block_size);
  const std::size_t n_blocks = (n + block_size - 1) / block_size;
  const int n_threads =
      static_cast<int>(std::min<std::size_t>(effective_threads(), n_blocks));
  if (n_threads <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b)
      fn(b, b * block_size, std::min(n, (b + 1) * block_size));
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  std::size_t next = 0;
  std::mutex next_mutex;
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t b;
        {
          std::lock_guard lock(next_mutex);
          if (next >= n_blocks) return;
          b = next++;
        }
        try {
          fn(b, b * block_size, std::min(n, (b + 1) * block_size));
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Compensated (Kahan) accumulator; combined in block order for determinism.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

}  // namespace pcc::math
