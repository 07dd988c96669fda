// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "core/types.hpp"

namespace segsplat {

// Axis-aligned primitive. Boxes use all three size components as full
// extents; panels are flat rectangles whose normal is `panel_axis` and
// whose size component on that axis is ignored.
struct SceneObject {
  enum class Kind { box, panel };
  std::uint32_t id = 0;
  Kind kind = Kind::box;
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();
  int panel_axis = 2;
  Vec3 color = Vec3::Constant(0.7);
};

struct OcclusionInterval {
  std::uint32_t object_id = 0;
  int first_frame = 0;
  int last_frame = -1;  // inclusive; empty when last < first
};

struct SceneSpec {
  Vec3 room_extent = Vec3(4, 3, 4);
  int frame_width = 128;
  int frame_height = 128;
  std::vector<SceneObject> objects;
  std::vector<Camera> trajectory;
  double noise_sigma = 0.0;
  double dropout = 0.0;
  std::uint64_t permute_seed = 1;
  std::vector<OcclusionInterval> occlusions;
  std::size_t gt_cloud_points = 20000;

  void validate() const;
};

struct SceneFrame {
  Camera camera;
  Image image;                  // shaded rgb, black background
  Pointmap pointmap;            // ideal hit points (+ optional noise/dropout)
  LabeledMaskSet gt_mask;       // global object ids
  LabeledMaskSet corrupted_mask;  // per-frame shuffled ids, occlusions erased
};

struct SceneBundle {
  std::vector<SceneFrame> frames;
  SegmentedPointCloud gt_cloud;  // sampled on object surfaces
};

// Ray-casts the analytic scene. Fully deterministic under (spec, seed);
// corruption shuffles mask ids independently per frame and drops occluded
// objects from the corrupted masks only. Throws Error(generation_failed),
// naming the frame, when a camera sits inside an object.
SceneBundle generate(const SceneSpec& spec, std::uint64_t seed);

// Copy of `base` with the object hidden (in corrupted masks) over the
// inclusive frame interval. Throws Error(invalid_input) for unknown ids or
// an interval outside the trajectory; an empty interval is a no-op.
SceneSpec reappearance_spec(const SceneSpec& base, std::uint32_t object_id,
                            int first_frame, int last_frame);

// Look-at pinhole camera (+y up).
Camera make_lookat_camera(const Vec3& eye, const Vec3& target, double fov_deg,
                          int width, int height);

// Arc of `count` look-at poses around `target` at the given radius/height,
// sweeping span_deg degrees centered on the -z axis.
std::vector<Camera> arc_trajectory(int count, const Vec3& target, double radius,
                                   double height, double span_deg,
                                   double fov_deg, int width, int height_px);

// First-hit query used by tests as well: returns the object slot (or -1),
// hit point and shading normal.
int raycast(const SceneSpec& spec, const Vec3& origin, const Vec3& dir,
            Vec3* hit, Vec3* normal);

}  // namespace segsplat
