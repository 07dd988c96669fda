// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace segsplat {

namespace {

inline double dist2(const Vec3& a, const Vec3& b) {
  double dx = a.x() - b.x();
  double dy = a.y() - b.y();
  double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

KdTree3::KdTree3(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(points_.size()));
  }
}

int KdTree3::build(int begin, int end) {
  Node node;
  if (end - begin <= kLeafSize) {
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  // Split on the widest axis at the median.
  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  Vec3 extent = hi - lo;
  if (extent.y() > extent.x()) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;

  int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int a, int b) {
                     double va = points_[a][axis], vb = points_[b][axis];
                     if (va != vb) return va < vb;
                     return a < b;
                   });
  node.axis = axis;
  node.split = points_[order_[mid]][axis];
  int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  int left = build(begin, mid);
  int right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree3::search_nearest(int node_idx, const Vec3& q, double& best_d2,
                             int& best_idx) const {
  const Node& node = nodes_[node_idx];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      int p = order_[i];
      double d2 = dist2(points_[p], q);
      if (d2 < best_d2 || (d2 == best_d2 && p < best_idx)) {
        best_d2 = d2;
        best_idx = p;
      }
    }
    return;
  }
  double delta = q[node.axis] - node.split;
  int first = delta < 0.0 ? node.left : node.right;
  int second = delta < 0.0 ? node.right : node.left;
  search_nearest(first, q, best_d2, best_idx);
  if (delta * delta <= best_d2) search_nearest(second, q, best_d2, best_idx);
}

int KdTree3::nearest(const Vec3& query, double* dist2_out) const {
  if (points_.empty()) return -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_idx = static_cast<int>(points_.size());
  search_nearest(root_, query, best_d2, best_idx);
  if (dist2_out) *dist2_out = best_d2;
  return best_idx;
}

std::vector<int> KdTree3::knn(const Vec3& query, int k, int skip_index) const {
  std::vector<int> result;
  if (points_.empty() || k <= 0) return result;

  using Entry = std::pair<double, int>;  // (dist2, index), max-heap
  std::priority_queue<Entry> heap;

  auto visit = [&](int p) {
    if (p == skip_index) return;
    double d2 = dist2(points_[p], query);
    Entry e{d2, p};
    if (static_cast<int>(heap.size()) < k) {
      heap.push(e);
    } else if (e < heap.top()) {
      heap.pop();
      heap.push(e);
    }
  };

  // Iterative traversal, nearer child first; prune against the heap top.
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    int node_idx = stack.back();
    stack.pop_back();
    const Node& node = nodes_[node_idx];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) visit(order_[i]);
      continue;
    }
    double delta = query[node.axis] - node.split;
    int first = delta < 0.0 ? node.left : node.right;
    int second = delta < 0.0 ? node.right : node.left;
    bool full = static_cast<int>(heap.size()) >= k;
    if (!full || delta * delta <= heap.top().first) stack.push_back(second);
    stack.push_back(first);
  }

  result.resize(heap.size());
  for (std::size_t i = result.size(); i-- > 0;) {
    result[i] = heap.top().second;
    heap.pop();
  }
  return result;
}

}  // namespace segsplat
