// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "core/plane.hpp"
#include "core/types.hpp"

namespace segsplat {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

constexpr int kIdentityDim = 16;
using IdentityVec = std::array<double, kIdentityDim>;

// Isotropic splat. raw_opacity and raw_scale are the optimized parameters;
// opacity() and scale() are their activations.
struct GaussianSplat {
  Vec3 position = Vec3::Zero();
  double raw_opacity = 0.0;
  double raw_scale = 0.0;
  Vec3 color = Vec3::Constant(0.5);
  IdentityVec identity{};
  std::uint32_t class_label = 0;  // compact class index, 0 = unlabeled

  double opacity() const { return logistic(raw_opacity); }
  double scale() const { return std::exp(raw_scale); }
};

// Linear head mapping a 16-d identity feature to K class logits.
struct Classifier {
  int class_count = 0;
  std::vector<double> weights;  // K x 16, row-major
  std::vector<double> bias;     // K

  void init_zero(int k) {
    class_count = k;
    weights.assign(static_cast<std::size_t>(k) * kIdentityDim, 0.0);
    bias.assign(k, 0.0);
  }
  void logits(const double* feature, double* out) const {
    for (int c = 0; c < class_count; ++c) {
      double v = bias[c];
      const double* w = weights.data() + static_cast<std::size_t>(c) * kIdentityDim;
      for (int j = 0; j < kIdentityDim; ++j) v += w[j] * feature[j];
      out[c] = v;
    }
  }
};

struct GaussianField {
  std::vector<GaussianSplat> splats;
  Classifier classifier;
  // Compact class index -> external global id; slot 0 is the unlabeled class.
  std::vector<std::uint32_t> class_to_global{0};

  int class_count() const { return classifier.class_count; }
  std::size_t size() const { return splats.size(); }

  // -1 when the global id is unknown to this field.
  int compact_class(std::uint32_t global_id) const;

  std::vector<Vec3> positions() const;
  std::vector<std::uint32_t> labels() const;
};

struct InitDefaults {
  double opacity = 0.1;
  // <= 0 keeps every cloud point; otherwise one splat per occupied voxel.
  double voxel_size = 0.0;
  Vec3 color = Vec3::Constant(0.5);
  double identity_noise = 0.1;
};

// One splat per (optionally voxel-downsampled) cloud point. Class labels are
// compacted; identities start from a small deterministic per-label vector so
// same-label splats begin together in feature space. Classifier is
// zero-initialized with K = distinct labels + 1.
GaussianField init_from_cloud(const SegmentedPointCloud& cloud,
                              const InitDefaults& defaults);

struct DensifyResult {
  GaussianField field;
  // For every output splat, the input index it came from; survivors keep
  // their parameters, clones/split children are new parameters.
  std::vector<int> source_index;
  std::vector<bool> is_new;
  int clone_count = 0;
  int split_count = 0;
};

// Clone small / split large splats whose accumulated positional gradient
// exceeds grad_threshold. Split children sample from the parent Gaussian
// (seeded), inherit class and identity, shrink scale by 1.6, and are
// projected onto the parent's plane when one exists. Clones are exact copies;
// the optimizer moves them on the next step.
DensifyResult densify(const GaussianField& field,
                      std::span<const double> position_gradient_norms,
                      double grad_threshold, double scale_threshold,
                      const PlaneSet& planes, std::uint64_t rng_seed);

struct PruneResult {
  GaussianField field;
  std::vector<int> kept;  // input indices of survivors, in order
};

// Drops splats with opacity below the floor; survivor order preserved.
PruneResult prune(const GaussianField& field, double opacity_floor);

struct EditResult {
  GaussianField field;
  bool known_id = false;
};

EditResult delete_object(const GaussianField& field, std::uint32_t global_id);
EditResult move_object(const GaussianField& field, std::uint32_t global_id,
                       const Vec3& translation);

}  // namespace segsplat
