// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "core/types.hpp"

namespace segsplat {

// Static 3D k-d tree over a point list. Queries break distance ties by the
// lowest point index, so results match a brute-force scan exactly and do
// not depend on tree layout.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(std::vector<Vec3> points);

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  // Index of the nearest point; -1 when the tree is empty.
  int nearest(const Vec3& query, double* dist2_out = nullptr) const;

  // Up to k nearest point indices (excluding skip_index), ordered by
  // (distance, index) ascending.
  std::vector<int> knn(const Vec3& query, int k, int skip_index = -1) const;

 private:
  struct Node {
    double split = 0.0;
    int axis = -1;      // -1 marks a leaf
    int left = -1;
    int right = -1;
    int begin = 0;      // leaf payload range in order_
    int end = 0;
  };

  int build(int begin, int end);
  void search_nearest(int node, const Vec3& q, double& best_d2,
                      int& best_idx) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 8;
};

}  // namespace segsplat
