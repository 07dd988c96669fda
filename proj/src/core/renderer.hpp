// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "core/field.hpp"
#include "core/types.hpp"

namespace segsplat {

// Transmittance below which a pixel stops accepting contributions.
constexpr double kTransmittanceFloor = 1e-4;
// Per-splat influence clamp keeps (1 - alpha') bounded away from zero.
constexpr double kAlphaClamp = 0.99;
// Near plane for projection culling.
constexpr double kNearPlane = 0.01;
// Rasterized footprint radius in units of the projected sigma.
constexpr double kFootprintSigmas = 3.0;

struct ProjectedSplat {
  int index = -1;       // splat index in the field
  double u = 0, v = 0;  // continuous pixel coordinates of the center
  double depth = 0;
  double sigma2d = 0;   // f_mean * sigma / depth, pixels
};

// Pinhole projection; nullopt when the splat is behind the near plane or
// its 3-sigma footprint misses the frame.
std::optional<ProjectedSplat> project(const GaussianSplat& splat,
                                      const Camera& camera, int index = 0);

// One splat's contribution to one pixel, before compositing.
struct CompositeInput {
  double influence = 0.0;  // alpha_i * gaussian falloff, before the clamp
  Vec3 color = Vec3::Zero();
  IdentityVec feature{};
};

struct CompositeOutput {
  Vec3 color = Vec3::Zero();
  IdentityVec feature{};
  double alpha = 0.0;
};

// Front-to-back alpha compositing over a depth-sorted list; clamps each
// influence to [0, 0.99] and stops once transmittance drops below 1e-4.
CompositeOutput composite(std::span<const CompositeInput> sorted);

struct CompositeGrads {
  std::vector<double> d_influence;  // w.r.t. the pre-clamp influence
  std::vector<Vec3> d_color;
  std::vector<IdentityVec> d_feature;
};

CompositeGrads composite_backward(std::span<const CompositeInput> sorted,
                                  const Vec3& d_color_out,
                                  const IdentityVec& d_feature_out,
                                  double d_alpha_out = 0.0);

struct RenderOutput {
  Image color;                  // H x W x 3
  std::vector<double> feature;  // H x W x 16
  Image class_probs;            // H x W x K
  Image alpha;                  // H x W x 1
  int width = 0, height = 0;
};

// Everything the backward pass replays: visible splats sorted by
// (depth, index) and per-row lists of their slots.
struct RenderCache {
  std::vector<ProjectedSplat> visible;
  std::vector<std::vector<int>> row_splats;
  Image color_total;
  std::vector<double> feature_total;
  Image alpha_total;
};

RenderOutput render(const GaussianField& field, const Camera& camera,
                    RenderCache* cache = nullptr);

struct RenderGrads {
  std::vector<Vec3> d_position;
  std::vector<double> d_raw_opacity;
  std::vector<double> d_raw_scale;
  std::vector<Vec3> d_color;
  std::vector<IdentityVec> d_identity;
  // Accumulated ndc-space gradient norm of the projected center, the
  // densification signal.
  std::vector<double> screen_grad_norm;
};

// Backpropagates image-space gradients (d_color: HxWx3, d_feature: HxWx16,
// both may be empty for zero) through compositing, the falloff, and the
// projection. Position gradients flow only through the projected 2D mean.
RenderGrads render_backward(const GaussianField& field, const Camera& camera,
                            const RenderCache& cache, const Image& d_color,
                            const std::vector<double>& d_feature);

// Labels rendered as the per-pixel argmax class (global ids); pixels with
// zero alpha stay unlabeled.
LabeledMaskSet argmax_mask(const RenderOutput& out, const GaussianField& field);

}  // namespace segsplat
