#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stochspin {

/// Resolves a requested worker count; 0 means "all hardware threads".
inline unsigned resolve_threads(unsigned requested) noexcept {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(block_index, begin, end) for every fixed-size block of [0, n).
/// Block boundaries depend only on n and block_size, never on the worker count,
/// so per-block results can be combined in block order for reproducible output.
/// If several blocks throw, the exception of the lowest block index wins.
template <typename Body>
void for_each_block(std::size_t n, std::size_t block_size, unsigned threads, Body&& body) {
  if (n == 0) return;
  block_size = std::max<std::size_t>(block_size, 1);
  const std::size_t n_blocks = (n + block_size - 1) / block_size;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n_blocks));

  auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * block_size;
    body(b, begin, std::min(n, begin + block_size));
  };

  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::size_t first_error_block = n_blocks;

  auto worker = [&] {
    for (std::size_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) {
      try {
        run_block(b);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (b < first_error_block) {
          first_error_block = b;
          first_error = std::current_exception();
        }
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();  // joins

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace stochspin
