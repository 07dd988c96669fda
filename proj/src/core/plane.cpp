// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/plane.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <map>

#include "core/error.hpp"
#include "core/kdtree.hpp"
#include "core/parallel.hpp"

namespace segsplat {

struct NeighborIndex::ClassTree {
  std::uint32_t label = 0;
  KdTree3 tree;
  std::vector<int> original_index;
};

NeighborIndex::NeighborIndex(std::span<const Vec3> positions,
                             std::span<const std::uint32_t> labels)
    : labels_(labels.begin(), labels.end()),
      positions_(positions.begin(), positions.end()) {
  std::map<std::uint32_t, std::vector<int>> by_label;
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] != 0) by_label[labels_[i]].push_back(static_cast<int>(i));

  std::uint32_t max_label = by_label.empty() ? 0 : by_label.rbegin()->first;
  class_of_label_.assign(max_label + 1, -1);
  for (auto& [label, indices] : by_label) {
    ClassTree ct;
    ct.label = label;
    std::vector<Vec3> pts;
    pts.reserve(indices.size());
    for (int i : indices) pts.push_back(positions_[i]);
    ct.tree = KdTree3(std::move(pts));
    ct.original_index = std::move(indices);
    class_of_label_[label] = static_cast<int>(trees_.size());
    trees_.push_back(std::move(ct));
  }
}

NeighborIndex::~NeighborIndex() = default;

std::vector<int> NeighborIndex::knn_same_class(int query_index, int k) const {
  std::uint32_t label = labels_[query_index];
  if (label == 0 || label >= class_of_label_.size()) return {};
  int slot = class_of_label_[label];
  if (slot < 0) return {};
  const ClassTree& ct = trees_[slot];
  // Locate the query inside its class tree to exclude it.
  int local = static_cast<int>(
      std::lower_bound(ct.original_index.begin(), ct.original_index.end(),
                       query_index) -
      ct.original_index.begin());
  int skip = (local < static_cast<int>(ct.original_index.size()) &&
              ct.original_index[local] == query_index)
                 ? local
                 : -1;
  std::vector<int> local_hits = ct.tree.knn(positions_[query_index], k, skip);
  std::vector<int> hits;
  hits.reserve(local_hits.size());
  for (int h : local_hits) hits.push_back(ct.original_index[h]);
  return hits;
}

std::vector<int> same_class_neighbors(std::span<const Vec3> positions,
                                      std::span<const std::uint32_t> labels,
                                      int query_index, int k) {
  if (k < 0) fail(ErrorCode::invalid_input, "neighbor count must be non-negative");
  NeighborIndex index(positions, labels);
  return index.knn_same_class(query_index, k);
}

Plane fit_plane(std::span<const Vec3> neighbor_positions) {
  const std::size_t n = neighbor_positions.size();
  if (n < 3)
    fail(ErrorCode::degenerate_plane, "plane fit needs at least 3 points");

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : neighbor_positions) centroid += p;
  centroid /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : neighbor_positions) {
    Vec3 d = p - centroid;
    cov += d * d.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  // Eigenvalues ascending; collinear input leaves only one spread direction.
  const Vec3& evals = eig.eigenvalues();
  double scale = std::max(evals[2], 1e-300);
  if (evals[1] <= 1e-12 * scale || evals[2] <= 0.0)
    fail(ErrorCode::degenerate_plane, "plane fit input is collinear");

  Vec3 normal = eig.eigenvectors().col(0);
  normal.normalize();
  for (int i = 0; i < 3; ++i) {
    if (normal[i] != 0.0) {
      if (normal[i] < 0.0) normal = -normal;
      break;
    }
  }

  Plane plane;
  plane.normal = normal;
  plane.anchor = centroid;
  plane.offset = -normal.dot(centroid);
  return plane;
}

double point_plane_distance(const Vec3& point, const Plane& plane) {
  return std::abs(plane.normal.dot(point - plane.anchor));
}

Vec3 split_project(const Vec3& point, const Plane& plane) {
  double signed_distance = plane.normal.dot(point - plane.anchor);
  return point - signed_distance * plane.normal;
}

PlaneLossResult plane_loss(std::span<const Vec3> positions,
                           const PlaneSet& planes) {
  PlaneLossResult result;
  result.gradient.assign(positions.size(), Vec3::Zero());
  if (positions.empty()) return result;
  const double inv_r = 1.0 / static_cast<double>(positions.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (i >= planes.planes.size() || !planes.planes[i]) continue;
    const Plane& plane = *planes.planes[i];
    double signed_distance = plane.normal.dot(positions[i] - plane.anchor);
    sum += std::abs(signed_distance);
    if (signed_distance > 0.0)
      result.gradient[i] = plane.normal * inv_r;
    else if (signed_distance < 0.0)
      result.gradient[i] = -plane.normal * inv_r;
    // exactly on the plane: zero subgradient
  }
  result.loss = sum * inv_r;
  return result;
}

PlaneSet fit_planes(std::span<const Vec3> positions,
                    std::span<const std::uint32_t> labels, int neighbor_count,
                    long iteration) {
  PlaneSet set;
  set.planes.assign(positions.size(), std::nullopt);
  set.fitted_at = iteration;
  if (positions.empty()) return set;

  NeighborIndex index(positions, labels);
  parallel_chunks(static_cast<std::int64_t>(positions.size()),
                  [&](std::int64_t begin, std::int64_t end) {
                    std::vector<Vec3> pts;
                    for (std::int64_t i = begin; i < end; ++i) {
                      if (labels[i] == 0) continue;
                      std::vector<int> nbrs =
                          index.knn_same_class(static_cast<int>(i), neighbor_count);
                      if (nbrs.size() < 3) continue;
                      pts.clear();
                      for (int n : nbrs) pts.push_back(positions[n]);
                      try {
                        set.planes[i] = fit_plane(pts);
                      } catch (const Error&) {
                        // collinear neighborhood: skip the constraint
                      }
                    }
                  });
  return set;
}

}  // namespace segsplat
