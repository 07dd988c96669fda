// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "core/error.hpp"

namespace segsplat {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

// Interleaved row-major image, `channels` doubles per pixel.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill) {}

  double* at(int x, int y) {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }
  const double* at(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
};

// Dense per-pixel field of 3D points in one shared world frame.
// `valid` marks pixels with a usable reconstruction.
struct Pointmap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> points;        // row-major, width*height
  std::vector<std::uint8_t> valid; // 0/1, same layout

  Pointmap() = default;
  Pointmap(int w, int h)
      : width(w), height(h),
        points(static_cast<std::size_t>(w) * h, Vec3::Zero()),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  void validate() const {
    if (width <= 0 || height <= 0)
      fail(ErrorCode::invalid_input, "pointmap has empty dimensions");
    if (points.size() != pixel_count() || valid.size() != pixel_count())
      fail(ErrorCode::invalid_input, "pointmap buffers do not match dimensions");
    for (std::size_t i = 0; i < points.size(); ++i)
      if (valid[i] && !points[i].allFinite())
        fail(ErrorCode::invalid_input, "pointmap has non-finite valid point");
  }
};

// Per-pixel instance ids; 0 means unlabeled. `id_list` holds the distinct
// nonzero ids present, sorted ascending.
struct LabeledMaskSet {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> ids;
  std::vector<std::uint32_t> id_list;

  LabeledMaskSet() = default;
  LabeledMaskSet(int w, int h)
      : width(w), height(h), ids(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  void rebuild_id_list() {
    std::set<std::uint32_t> present(ids.begin(), ids.end());
    present.erase(0);
    id_list.assign(present.begin(), present.end());
  }

  std::size_t mask_size(std::uint32_t id) const {
    return static_cast<std::size_t>(std::count(ids.begin(), ids.end(), id));
  }
};

// Pixel-to-pixel map into another frame. Targets are stored as flat
// row-major indices into the target grid; `defined` gates them.
struct CorrespondenceMap {
  int width = 0;
  int height = 0;
  int target_width = 0;
  int target_height = 0;
  std::vector<std::uint32_t> target;  // flat index into target frame
  std::vector<std::uint8_t> defined;

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
};

// Accumulated labeled 3D points. Labels are nonzero global ids.
struct SegmentedPointCloud {
  std::vector<Vec3> positions;
  std::vector<std::uint32_t> labels;
  std::vector<std::uint32_t> source_frame;

  std::size_t size() const { return positions.size(); }
  void append(const Vec3& p, std::uint32_t label, std::uint32_t frame) {
    positions.push_back(p);
    labels.push_back(label);
    source_frame.push_back(frame);
  }

  void validate() const {
    if (labels.size() != positions.size() ||
        source_frame.size() != positions.size())
      fail(ErrorCode::invalid_input, "cloud arrays have mismatched lengths");
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (!positions[i].allFinite())
        fail(ErrorCode::invalid_input, "cloud has non-finite position");
      if (labels[i] == 0)
        fail(ErrorCode::invalid_input, "cloud has zero label");
    }
  }
};

// Pinhole camera; pose maps world points into the camera frame:
// x_cam = rotation * x_world + translation.
struct Camera {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  int width = 0;
  int height = 0;

  void validate() const {
    if (fx <= 0 || fy <= 0)
      fail(ErrorCode::invalid_input, "camera focal lengths must be positive");
    if (width <= 0 || height <= 0)
      fail(ErrorCode::invalid_input, "camera frame must be non-empty");
    if ((rotation * rotation.transpose() - Mat3::Identity()).norm() > 1e-9)
      fail(ErrorCode::invalid_input, "camera rotation is not orthonormal");
  }

  Vec3 world_to_camera(const Vec3& p) const { return rotation * p + translation; }
  Vec3 origin() const { return -(rotation.transpose() * translation); }
};

}  // namespace segsplat
