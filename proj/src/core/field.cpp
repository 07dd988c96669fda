// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/field.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "core/error.hpp"
#include "core/kdtree.hpp"
#include "core/rng.hpp"

namespace segsplat {

int GaussianField::compact_class(std::uint32_t global_id) const {
  for (std::size_t i = 1; i < class_to_global.size(); ++i)
    if (class_to_global[i] == global_id) return static_cast<int>(i);
  return -1;
}

std::vector<Vec3> GaussianField::positions() const {
  std::vector<Vec3> out;
  out.reserve(splats.size());
  for (const auto& s : splats) out.push_back(s.position);
  return out;
}

std::vector<std::uint32_t> GaussianField::labels() const {
  std::vector<std::uint32_t> out;
  out.reserve(splats.size());
  for (const auto& s : splats) out.push_back(s.class_label);
  return out;
}

namespace {

IdentityVec label_identity(std::uint32_t global_id, double amplitude) {
  IdentityVec v{};
  Pcg32 rng(mix_seed(0x1d377157ULL, global_id));
  for (double& x : v) x = amplitude * rng.next_gaussian();
  return v;
}

struct VoxelKey {
  long long x, y, z;
  bool operator<(const VoxelKey& o) const {
    if (x != o.x) return x < o.x;
    if (y != o.y) return y < o.y;
    return z < o.z;
  }
};

}  // namespace

GaussianField init_from_cloud(const SegmentedPointCloud& cloud,
                              const InitDefaults& defaults) {
  if (cloud.size() == 0)
    fail(ErrorCode::invalid_input, "cannot initialize a field from an empty cloud");
  // label 0 is accepted here (unlabeled splats, exempt from the 3d loss)
  if (cloud.labels.size() != cloud.positions.size() ||
      cloud.source_frame.size() != cloud.positions.size())
    fail(ErrorCode::invalid_input, "cloud arrays have mismatched lengths");
  for (const Vec3& p : cloud.positions)
    if (!p.allFinite())
      fail(ErrorCode::invalid_input, "cloud has non-finite position");

  // Optional voxel downsample: keep the first point per occupied cell.
  std::vector<std::size_t> selected;
  if (defaults.voxel_size > 0.0) {
    std::map<VoxelKey, std::size_t> cells;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.positions[i];
      VoxelKey key{static_cast<long long>(std::floor(p.x() / defaults.voxel_size)),
                   static_cast<long long>(std::floor(p.y() / defaults.voxel_size)),
                   static_cast<long long>(std::floor(p.z() / defaults.voxel_size))};
      cells.emplace(key, i);
    }
    selected.reserve(cells.size());
    for (auto& [key, idx] : cells) selected.push_back(idx);
    std::sort(selected.begin(), selected.end());
  } else {
    selected.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) selected[i] = i;
  }

  // Compact label map: global ids in ascending order take classes 1..n.
  std::set<std::uint32_t> globals(cloud.labels.begin(), cloud.labels.end());
  globals.erase(0);
  GaussianField field;
  field.class_to_global.assign(1, 0);
  std::unordered_map<std::uint32_t, std::uint32_t> to_compact;
  to_compact[0] = 0;
  for (std::uint32_t g : globals) {
    to_compact[g] = static_cast<std::uint32_t>(field.class_to_global.size());
    field.class_to_global.push_back(g);
  }
  field.classifier.init_zero(static_cast<int>(field.class_to_global.size()));

  // Initial scale: mean distance to the 3 nearest selected points.
  std::vector<Vec3> pts;
  pts.reserve(selected.size());
  for (std::size_t idx : selected) pts.push_back(cloud.positions[idx]);
  KdTree3 tree(pts);

  field.splats.reserve(selected.size());
  for (std::size_t k = 0; k < selected.size(); ++k) {
    std::size_t idx = selected[k];
    GaussianSplat s;
    s.position = cloud.positions[idx];
    s.raw_opacity = logit(defaults.opacity);
    std::vector<int> nn = tree.knn(s.position, 3, static_cast<int>(k));
    double mean_dist = 0.0;
    for (int n : nn) mean_dist += (pts[n] - s.position).norm();
    mean_dist = nn.empty() ? 1e-3 : mean_dist / static_cast<double>(nn.size());
    s.raw_scale = std::log(std::max(mean_dist, 1e-7));
    s.color = defaults.color;
    std::uint32_t global = cloud.labels[idx];
    s.class_label = to_compact[global];
    s.identity = label_identity(global, defaults.identity_noise);
    field.splats.push_back(s);
  }
  return field;
}

DensifyResult densify(const GaussianField& field,
                      std::span<const double> position_gradient_norms,
                      double grad_threshold, double scale_threshold,
                      const PlaneSet& planes, std::uint64_t rng_seed) {
  if (position_gradient_norms.size() != field.size())
    fail(ErrorCode::invalid_input, "gradient norms length mismatch");
  for (double g : position_gradient_norms)
    if (!std::isfinite(g))
      fail(ErrorCode::invalid_input, "gradient norms must be finite");

  const int n = static_cast<int>(field.size());
  std::vector<char> cloned(n, 0), split(n, 0);
  for (int i = 0; i < n; ++i) {
    if (position_gradient_norms[i] <= grad_threshold) continue;
    if (field.splats[i].scale() <= scale_threshold)
      cloned[i] = 1;
    else
      split[i] = 1;
  }

  DensifyResult result;
  result.field.classifier = field.classifier;
  result.field.class_to_global = field.class_to_global;
  // Survivors first (split parents removed), then clones, then children.
  for (int i = 0; i < n; ++i) {
    if (split[i]) continue;
    result.field.splats.push_back(field.splats[i]);
    result.source_index.push_back(i);
    result.is_new.push_back(false);
  }
  for (int i = 0; i < n; ++i) {
    if (!cloned[i]) continue;
    result.field.splats.push_back(field.splats[i]);
    result.source_index.push_back(i);
    result.is_new.push_back(true);
    ++result.clone_count;
  }
  for (int i = 0; i < n; ++i) {
    if (!split[i]) continue;
    const GaussianSplat& parent = field.splats[i];
    Pcg32 rng(mix_seed(rng_seed, static_cast<std::uint64_t>(i)));
    double sigma = parent.scale();
    for (int child = 0; child < 2; ++child) {
      GaussianSplat s = parent;
      s.position = parent.position + sigma * Vec3(rng.next_gaussian(),
                                                  rng.next_gaussian(),
                                                  rng.next_gaussian());
      s.raw_scale = std::log(sigma / 1.6);
      if (static_cast<std::size_t>(i) < planes.planes.size() && planes.planes[i])
        s.position = split_project(s.position, *planes.planes[i]);
      result.field.splats.push_back(s);
      result.source_index.push_back(i);
      result.is_new.push_back(true);
    }
    ++result.split_count;
  }
  return result;
}

PruneResult prune(const GaussianField& field, double opacity_floor) {
  PruneResult result;
  result.field.classifier = field.classifier;
  result.field.class_to_global = field.class_to_global;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field.splats[i].opacity() < opacity_floor) continue;
    result.field.splats.push_back(field.splats[i]);
    result.kept.push_back(static_cast<int>(i));
  }
  return result;
}

EditResult delete_object(const GaussianField& field, std::uint32_t global_id) {
  EditResult result;
  result.field.classifier = field.classifier;
  result.field.class_to_global = field.class_to_global;
  int cls = field.compact_class(global_id);
  result.known_id = cls >= 0;
  for (const auto& s : field.splats) {
    if (result.known_id && s.class_label == static_cast<std::uint32_t>(cls))
      continue;
    result.field.splats.push_back(s);
  }
  return result;
}

EditResult move_object(const GaussianField& field, std::uint32_t global_id,
                       const Vec3& translation) {
  EditResult result;
  result.field = field;
  int cls = field.compact_class(global_id);
  result.known_id = cls >= 0;
  if (!result.known_id) return result;
  for (auto& s : result.field.splats)
    if (s.class_label == static_cast<std::uint32_t>(cls))
      s.position += translation;
  return result;
}

}  // namespace segsplat
