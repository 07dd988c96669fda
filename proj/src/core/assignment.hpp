// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace segsplat {

// Rectangular cost matrix, row-major, entries in [0,1].
struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  CostMatrix() = default;
  CostMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return values[static_cast<std::size_t>(r) * cols + c];
  }
};

// One-to-one partial matching. Every row appears either in `pairs` or in
// `unmatched_rows`, exactly once; same for columns.
struct PartialAssignment {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;

  double total_cost(const CostMatrix& costs) const {
    double sum = 0.0;
    for (auto [r, c] : pairs) sum += costs.at(r, c);
    return sum;
  }
};

// Minimum-cost maximum-cardinality one-to-one matching over the entries with
// cost <= reject_above. Cardinality is maximized first, then total matched
// cost is minimized. Pure function; deterministic (scanning order breaks
// ties toward the lowest row, then the lowest column).
//
// Shortest-augmenting-path solver on a square padding of the problem where
// each row and column also has an "unmatched" option; polynomial in the
// matrix size. Throws Error(invalid_input) on non-finite or out-of-range
// entries or thresholds.
PartialAssignment solve_assignment(const CostMatrix& costs, double reject_above);

}  // namespace segsplat
