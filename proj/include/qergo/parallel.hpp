// parallel.hpp
// Deterministic chunked parallel-for. Work is split into fixed-size chunks
// regardless of thread count; per-chunk results are reduced in chunk order,
// so floating-point accumulation is identical for any number of workers.

#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace qergo {

inline constexpr long kChunkSize = 256;

// Runs fn(begin, end, chunk_index) over [0, n) in chunks of kChunkSize.
// Chunk indices are dense; fn must only write state owned by its chunk.
template <typename Fn>
void run_chunked(long n, int threads, Fn&& fn) {
  if (n <= 0) return;
  const long n_chunks = (n + kChunkSize - 1) / kChunkSize;
  if (threads <= 1 || n_chunks == 1) {
    for (long c = 0; c < n_chunks; ++c) {
      fn(c * kChunkSize, std::min(n, (c + 1) * kChunkSize), c);
    }
    return;
  }
  std::atomic<long> next{0};
  auto worker = [&] {
    for (;;) {
      const long c = next.fetch_add(1);
      if (c >= n_chunks) return;
      fn(c * kChunkSize, std::min(n, (c + 1) * kChunkSize), c);
    }
  };
  std::vector<std::thread> pool;
  const int n_workers = static_cast<int>(std::min<long>(threads, n_chunks));
  pool.reserve(n_workers);
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace qergo
