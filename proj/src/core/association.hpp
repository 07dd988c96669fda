// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "core/types.hpp"

namespace segsplat {

// For each valid source pixel, the valid target pixel whose 3D point is
// nearest in Euclidean distance (ties: lowest row-major target index).
// Throws Error(empty_target) when the target has no valid pixels.
CorrespondenceMap build_correspondence(const Pointmap& source,
                                       const Pointmap& target);

// |{(i,j) : ids_a(i,j) = a, phi defined at (i,j), ids_b(phi(i,j)) = b}|.
std::size_t masked_overlap(std::uint32_t mask_a_id, const LabeledMaskSet& masks_a,
                           std::uint32_t mask_b_id, const LabeledMaskSet& masks_b,
                           const CorrespondenceMap& phi);

// 1 - overlap / min(size_a, size_b). Requires sizes >= 1 and
// overlap <= min(size_a, size_b).
double matching_cost(std::size_t overlap, std::size_t size_a, std::size_t size_b);

enum class AssociationMode {
  adjacent,     // match each frame against the previous frame's masks
  accumulated,  // match against a virtual mask rendered from the fused cloud
  independent,  // no matching: every mask gets a fresh global id
};

struct AssociationConfig {
  AssociationMode mode = AssociationMode::accumulated;
  double reject_above = 0.7;
  std::size_t min_mask_pixels = 16;
  // accumulated mode: a pixel is "seen" when its 3D point has an
  // accumulated neighbor within this radius (scene units).
  double assoc_radius = 0.1;
};

struct AssociationResult {
  std::vector<LabeledMaskSet> masks;  // per frame, globally consistent ids
  SegmentedPointCloud cloud;
};

// Sequential association over (pointmap, mask) frames. Frame 1 adopts its
// own ids as global ids; later frames are matched by overlap cost and
// partial assignment; matched masks inherit the global id, unmatched masks
// with at least min_mask_pixels get fresh ids, smaller ones become
// unlabeled. Labeled pixels with valid pointmap entries accumulate into the
// output cloud.
AssociationResult associate_sequence(
    const std::vector<std::pair<Pointmap, LabeledMaskSet>>& frames,
    const AssociationConfig& config);

}  // namespace segsplat
