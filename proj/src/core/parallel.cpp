// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace segsplat {

int thread_count() {
  if (const char* env = std::getenv("SEGSPLAT_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_chunks(std::int64_t n,
                     const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  // Fixed chunk geometry: 64 chunks regardless of worker count.
  const std::int64_t chunks = std::min<std::int64_t>(64, n);
  const std::int64_t chunk_size = (n + chunks - 1) / chunks;
  const int workers = std::min<int>(thread_count(), static_cast<int>(chunks));

  if (workers <= 1) {
    for (std::int64_t c = 0; c < chunks; ++c) {
      std::int64_t begin = c * chunk_size;
      std::int64_t end = std::min(n, begin + chunk_size);
      if (begin < end) fn(begin, end);
    }
    return;
  }

  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::int64_t c = next.fetch_add(1);
      if (c >= chunks) return;
      std::int64_t begin = c * chunk_size;
      std::int64_t end = std::min(n, begin + chunk_size);
      if (begin < end) fn(begin, end);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace segsplat
