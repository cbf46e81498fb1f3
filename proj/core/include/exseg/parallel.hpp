#pragma once
// Deterministic data-parallel helper. Work is split into a fixed number of
// chunks independent of the worker count, so per-chunk results (and any
// reduction done in chunk order) are identical on every machine.

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace exseg {

inline constexpr std::size_t kParallelChunks = 64;

/// Calls fn(chunk_index, begin, end) for a fixed partition of [0, n).
/// Chunks run on up to hardware_concurrency() threads; fn must only write
/// to chunk-local or per-index state.
template <typename Fn>
void parallel_chunks(std::size_t n, Fn&& fn) {
  if (n == 0) return;
  const std::size_t chunks = std::min(kParallelChunks, n);
  const std::size_t per = (n + chunks - 1) / chunks;

  unsigned workers = std::thread::hardware_concurrency();
  if (workers <= 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t b = c * per;
      const std::size_t e = std::min(n, b + per);
      if (b < e) fn(c, b, e);
    }
    return;
  }

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t c = w; c < chunks; c += workers) {
        const std::size_t b = c * per;
        const std::size_t e = std::min(n, b + per);
        if (b < e) fn(c, b, e);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace exseg
