// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/assignment.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

using namespace segsplat;

namespace {

struct OracleResult {
  int cardinality = 0;
  double cost = 0.0;
};

// Exhaustive optimum over all injective partial row->col maps whose matched
// entries stay within the threshold: maximum cardinality first, then
// minimum cost. Memoized over (row, used-column bitmask), which still
// covers every matching; independent of the solver under test.
OracleResult oracle(const CostMatrix& costs, double reject_above) {
  const int rows = costs.rows, cols = costs.cols;
  const int masks = 1 << cols;
  const double inf = std::numeric_limits<double>::infinity();
  // (-cardinality, cost) reachable per used-column mask
  std::vector<std::pair<int, double>> best(masks, {1, inf}), next(masks);
  best[0] = {0, 0.0};
  auto better = [](std::pair<int, double> a, std::pair<int, double> b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  };
  for (int r = 0; r < rows; ++r) {
    std::fill(next.begin(), next.end(), std::make_pair(1, inf));
    for (int mask = 0; mask < masks; ++mask) {
      if (best[mask].first == 1) continue;  // unreachable
      if (better(best[mask], next[mask])) next[mask] = best[mask];
      for (int c = 0; c < cols; ++c) {
        if (mask & (1 << c)) continue;
        double v = costs.at(r, c);
        if (v > reject_above) continue;
        std::pair<int, double> cand{best[mask].first - 1, best[mask].second + v};
        if (better(cand, next[mask | (1 << c)])) next[mask | (1 << c)] = cand;
      }
    }
    best.swap(next);
  }
  std::pair<int, double> top{1, inf};
  for (int mask = 0; mask < masks; ++mask)
    if (better(best[mask], top)) top = best[mask];
  return {-top.first, top.second};
}

CostMatrix random_matrix(Pcg32& rng, int rows, int cols) {
  CostMatrix m(rows, cols);
  for (double& v : m.values) v = rng.next_double();
  return m;
}

void check_structure(const CostMatrix& m, const PartialAssignment& a,
                     double reject_above) {
  std::vector<int> row_seen(m.rows, 0), col_seen(m.cols, 0);
  for (auto [r, c] : a.pairs) {
    ++row_seen[r];
    ++col_seen[c];
    CHECK(m.at(r, c) <= reject_above);
  }
  for (int r : a.unmatched_rows) ++row_seen[r];
  for (int c : a.unmatched_cols) ++col_seen[c];
  for (int r = 0; r < m.rows; ++r) CHECK(row_seen[r] == 1);
  for (int c = 0; c < m.cols; ++c) CHECK(col_seen[c] == 1);
}

}  // namespace

TEST_CASE("diagonal matrix matches the identity") {
  CostMatrix m(3, 3, 1.0);
  for (int i = 0; i < 3; ++i) m.at(i, i) = 0.0;
  PartialAssignment a = solve_assignment(m, 0.5);
  REQUIRE(a.pairs.size() == 3);
  for (auto [r, c] : a.pairs) CHECK(r == c);
  CHECK(a.unmatched_rows.empty());
  CHECK(a.unmatched_cols.empty());
}

TEST_CASE("all entries above the threshold match nothing") {
  CostMatrix m(2, 2, 0.9);
  PartialAssignment a = solve_assignment(m, 0.5);
  CHECK(a.pairs.empty());
  CHECK(a.unmatched_rows == std::vector<int>{0, 1});
  CHECK(a.unmatched_cols == std::vector<int>{0, 1});
}

TEST_CASE("non-finite or out-of-range input is rejected") {
  CostMatrix m(2, 2, 0.5);
  m.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_assignment(m, 0.5), Error);
  m.at(0, 1) = 2.0;
  CHECK_THROWS_AS(solve_assignment(m, 0.5), Error);
  m.at(0, 1) = 0.5;
  CHECK_THROWS_AS(solve_assignment(m, 1.5), Error);
}

TEST_CASE("empty dimensions yield all-unmatched") {
  PartialAssignment a = solve_assignment(CostMatrix(0, 3), 0.5);
  CHECK(a.pairs.empty());
  CHECK(a.unmatched_cols.size() == 3);
  PartialAssignment b = solve_assignment(CostMatrix(2, 0), 0.5);
  CHECK(b.unmatched_rows.size() == 2);
}

TEST_CASE("random 5x6 matrices equal the exhaustive oracle") {
  Pcg32 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    CostMatrix m = random_matrix(rng, 5, 6);
    PartialAssignment a = solve_assignment(m, 0.7);
    OracleResult o = oracle(m, 0.7);
    CHECK(static_cast<int>(a.pairs.size()) == o.cardinality);
    CHECK(a.total_cost(m) == doctest::Approx(o.cost).epsilon(1e-12));
    check_structure(m, a, 0.7);
  }
}

TEST_CASE("oracle equivalence across shapes and thresholds") {
  Pcg32 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    int rows = 1 + static_cast<int>(rng.next_below(7));
    int cols = 1 + static_cast<int>(rng.next_below(7));
    double threshold = trial % 3 == 0 ? 0.3 : (trial % 3 == 1 ? 0.7 : 1.0);
    CostMatrix m = random_matrix(rng, rows, cols);
    PartialAssignment a = solve_assignment(m, threshold);
    OracleResult o = oracle(m, threshold);
    CHECK(static_cast<int>(a.pairs.size()) == o.cardinality);
    CHECK(a.total_cost(m) == doctest::Approx(o.cost).epsilon(1e-12));
  }
}

TEST_CASE("solver is a pure function") {
  Pcg32 rng(11);
  CostMatrix m = random_matrix(rng, 6, 4);
  PartialAssignment a = solve_assignment(m, 0.7);
  PartialAssignment b = solve_assignment(m, 0.7);
  CHECK(a.pairs == b.pairs);
  CHECK(a.unmatched_rows == b.unmatched_rows);
  CHECK(a.unmatched_cols == b.unmatched_cols);
}

TEST_CASE("row permutation equivariance on generic matrices") {
  Pcg32 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    int rows = 3 + static_cast<int>(rng.next_below(4));
    int cols = 3 + static_cast<int>(rng.next_below(4));
    CostMatrix m = random_matrix(rng, rows, cols);

    std::vector<int> perm(rows);
    for (int r = 0; r < rows; ++r) perm[r] = r;
    for (int r = rows - 1; r > 0; --r)
      std::swap(perm[r], perm[rng.next_below(static_cast<std::uint32_t>(r + 1))]);

    CostMatrix pm(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) pm.at(perm[r], c) = m.at(r, c);

    // continuous random entries: the optimum is unique with probability 1
    auto a = solve_assignment(m, 0.7);
    auto b = solve_assignment(pm, 0.7);
    std::vector<std::pair<int, int>> mapped;
    for (auto [r, c] : a.pairs) mapped.emplace_back(perm[r], c);
    std::sort(mapped.begin(), mapped.end());
    std::vector<std::pair<int, int>> got(b.pairs.begin(), b.pairs.end());
    std::sort(got.begin(), got.end());
    CHECK(mapped == got);
  }
}

TEST_CASE("plain recursion cross-checks the memoized oracle on tiny inputs") {
  struct Recurse {
    const CostMatrix& m;
    double threshold;
    int best_card = 0;
    double best_cost = 0.0;
    std::vector<char> used;
    void go(int row, int card, double cost) {
      if (row == m.rows) {
        if (card > best_card || (card == best_card && cost < best_cost)) {
          best_card = card;
          best_cost = cost;
        }
        return;
      }
      go(row + 1, card, cost);
      for (int c = 0; c < m.cols; ++c) {
        if (used[c] || m.at(row, c) > threshold) continue;
        used[c] = 1;
        go(row + 1, card + 1, cost + m.at(row, c));
        used[c] = 0;
      }
    }
  };
  Pcg32 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    CostMatrix m = random_matrix(rng, 4, 4);
    Recurse rec{m, 0.7, 0, 0.0, std::vector<char>(4, 0)};
    rec.go(0, 0, 0.0);
    OracleResult o = oracle(m, 0.7);
    CHECK(rec.best_card == o.cardinality);
    CHECK(rec.best_cost == doctest::Approx(o.cost).epsilon(1e-12));
  }
}
