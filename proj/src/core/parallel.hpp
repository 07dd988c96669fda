// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>

namespace segsplat {

// Thread count used by parallel_for. Resolved once from SEGSPLAT_THREADS
// (default: hardware concurrency).
int thread_count();

// Runs fn(begin, end) over disjoint contiguous chunks of [0, n).
// Chunk boundaries depend only on n, never on the thread count, so any
// caller that writes to disjoint outputs per index is bit-deterministic
// regardless of SEGSPLAT_THREADS. Reductions must keep per-chunk partials
// and combine them in chunk order.
void parallel_chunks(std::int64_t n,
                     const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace segsplat
