// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "core/field.hpp"
#include "core/types.hpp"

namespace segsplat {

// Per (pred id, gt id) intersection plus per-id pixel totals, summed across
// views; IoU of a pair is I / (|pred| + |gt| - I) on the pooled counts.
struct IoUAccumulator {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> intersection;
  std::map<std::uint32_t, std::size_t> pred_pixels;
  std::map<std::uint32_t, std::size_t> gt_pixels;

  void add_view(const LabeledMaskSet& pred, const LabeledMaskSet& gt);
  // Mean over gt ids of the optimally matched IoU (unmatched gt scores 0).
  double mean_matched_iou() const;
};

// Single-view mIoU with optimal one-to-one matching between predicted and
// ground-truth masks. Throws Error(undefined_metric) when gt has no masks.
double miou_single(const LabeledMaskSet& pred, const LabeledMaskSet& gt);

// Multi-view mIoU: pools intersection/union counts per global id pair
// across views before matching.
double miou_multi(const std::vector<LabeledMaskSet>& preds,
                  const std::vector<LabeledMaskSet>& gts);

// 3D mIoU over splats: each splat takes the label of its nearest gt point
// within gamma (else a reserved no-category label that penalizes floaters
// through the unions), predicted labels are the classifier argmax, and
// pred/gt id spaces are aligned by optimal assignment. Mean over gt classes
// present.
double miou_3d(const GaussianField& field, const SegmentedPointCloud& gt_cloud,
               double gamma);

// Symmetric mean Euclidean nearest-neighbor distance, halved.
double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

// 10*log10(1/MSE); +infinity for identical images.
double psnr(const Image& img, const Image& ref);

// Similarity transform q = scale * rotation * p + translation.
struct SimilarityTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
};

// Least-squares similarity alignment of `source` onto `target` with known
// correspondence (same length, same order). Optional pre-step for data
// that does not share the synthetic world frame; the built-in pipeline
// never needs it.
SimilarityTransform procrustes_align(const std::vector<Vec3>& source,
                                     const std::vector<Vec3>& target);

}  // namespace segsplat
