// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "core/types.hpp"

namespace segsplat {

// Local plane n.x + offset = 0 with a unit normal and an anchor point on
// the plane (the neighbor centroid).
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  Vec3 anchor = Vec3::Zero();
};

// Optional per-splat plane, refreshed on a schedule during training.
struct PlaneSet {
  std::vector<std::optional<Plane>> planes;
  long fitted_at = -1;

  std::size_t size() const { return planes.size(); }
};

// Indices of the k nearest points sharing the query's label, excluding the
// query itself; fewer than k when the class is small. Builds a one-shot
// index; use NeighborIndex when querying many points of one snapshot.
std::vector<int> same_class_neighbors(std::span<const Vec3> positions,
                                      std::span<const std::uint32_t> labels,
                                      int query_index, int k);

// Per-class k-d trees over one immutable snapshot of positions/labels.
class NeighborIndex {
 public:
  NeighborIndex(std::span<const Vec3> positions,
                std::span<const std::uint32_t> labels);
  ~NeighborIndex();
  std::vector<int> knn_same_class(int query_index, int k) const;

 private:
  struct ClassTree;
  std::vector<std::uint32_t> labels_;
  std::vector<Vec3> positions_;
  std::vector<ClassTree> trees_;
  std::vector<int> class_of_label_;  // dense lookup, label -> tree slot or -1
};

// Least-squares plane through >= 3 non-collinear points: anchor is the
// centroid, the normal is the smallest principal direction of the centered
// covariance, sign-canonicalized so the first nonzero component is positive.
// Throws Error(degenerate_plane) for collinear or coincident input.
Plane fit_plane(std::span<const Vec3> neighbor_positions);

// |normal . (point - anchor)|.
double point_plane_distance(const Vec3& point, const Plane& plane);

// Orthogonal projection of `point` onto `plane`.
Vec3 split_project(const Vec3& point, const Plane& plane);

struct PlaneLossResult {
  double loss = 0.0;
  std::vector<Vec3> gradient;  // per point, zero where no plane
};

// Mean point-to-plane distance over splats that carry a plane, divided by
// the total splat count r. Gradient of a contributing point is
// sign(normal.(x-anchor)) * normal / r, and zero exactly on the plane.
PlaneLossResult plane_loss(std::span<const Vec3> positions,
                           const PlaneSet& planes);

// Fits a plane for every labeled splat with at least 3 usable same-class
// neighbors; others get nullopt.
PlaneSet fit_planes(std::span<const Vec3> positions,
                    std::span<const std::uint32_t> labels, int neighbor_count,
                    long iteration);

}  // namespace segsplat
