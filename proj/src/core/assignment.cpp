// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace segsplat {

namespace {

// Any padded matching that avoids forbidden entries costs well below this.
constexpr double kForbidden = 1e9;

}  // namespace

PartialAssignment solve_assignment(const CostMatrix& costs, double reject_above) {
  const int rows = costs.rows;
  const int cols = costs.cols;
  if (rows < 0 || cols < 0 ||
      costs.values.size() != static_cast<std::size_t>(rows) * cols)
    fail(ErrorCode::invalid_input, "cost matrix shape mismatch");
  if (!(reject_above >= 0.0 && reject_above <= 1.0))
    fail(ErrorCode::invalid_input, "reject_above must lie in [0,1]");
  for (double v : costs.values) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      fail(ErrorCode::invalid_input, "cost entries must be finite and in [0,1]");
  }

  PartialAssignment out;
  if (rows == 0 || cols == 0) {
    for (int r = 0; r < rows; ++r) out.unmatched_rows.push_back(r);
    for (int c = 0; c < cols; ++c) out.unmatched_cols.push_back(c);
    return out;
  }

  // Square padding of size n = rows + cols:
  //   [ real costs | row-dummy diag U ]
  //   [ col-dummy U |        0        ]
  // Leaving a real pair unmatched costs 2U; U > min(rows, cols)/2 makes any
  // higher-cardinality matching strictly cheaper, so the optimum of the
  // padded square problem is the max-cardinality min-cost partial matching.
  const int n = rows + cols;
  const double unmatched_penalty = static_cast<double>(std::min(rows, cols)) + 1.0;
  auto entry = [&](int i, int j) -> double {
    if (i < rows) {
      if (j < cols) {
        double v = costs.at(i, j);
        return v <= reject_above ? v : kForbidden;
      }
      return (j - cols == i) ? unmatched_penalty : kForbidden;
    }
    if (j < cols) return (i - rows == j) ? unmatched_penalty : kForbidden;
    return 0.0;
  };

  // Jonker-Volgenant shortest augmenting paths with 1-based column 0 as the
  // virtual start, strict '<' comparisons keep the lowest-index choice.
  std::vector<double> pot_row(n + 1, 0.0), pot_col(n + 1, 0.0);
  std::vector<int> col_to_row(n + 1, 0);
  std::vector<int> via(n + 1, 0);
  std::vector<double> min_slack(n + 1);
  std::vector<char> used(n + 1);

  for (int r = 1; r <= n; ++r) {
    col_to_row[0] = r;
    int j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(),
              std::numeric_limits<double>::infinity());
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      int r0 = col_to_row[j0];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double reduced = entry(r0 - 1, j - 1) - pot_row[r0] - pot_col[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          via[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          pot_row[col_to_row[j]] += delta;
          pot_col[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_to_row[j0] != 0);
    do {
      int j1 = via[j0];
      col_to_row[j0] = col_to_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (col_to_row[j] != 0) row_to_col[col_to_row[j] - 1] = j - 1;

  for (int r = 0; r < rows; ++r) {
    int c = row_to_col[r];
    if (c >= 0 && c < cols)
      out.pairs.emplace_back(r, c);
    else
      out.unmatched_rows.push_back(r);
  }
  std::vector<char> col_matched(cols, 0);
  for (auto [r, c] : out.pairs) col_matched[c] = 1;
  for (int c = 0; c < cols; ++c)
    if (!col_matched[c]) out.unmatched_cols.push_back(c);
  return out;
}

}  // namespace segsplat
