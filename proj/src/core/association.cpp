// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/association.hpp"

#include <algorithm>
#include <unordered_map>

#include "core/assignment.hpp"
#include "core/error.hpp"
#include "core/kdtree.hpp"
#include "core/parallel.hpp"

namespace segsplat {

CorrespondenceMap build_correspondence(const Pointmap& source,
                                       const Pointmap& target) {
  source.validate();
  target.validate();

  std::vector<Vec3> target_points;
  std::vector<std::uint32_t> target_index;
  target_points.reserve(target.pixel_count());
  for (std::size_t i = 0; i < target.pixel_count(); ++i) {
    if (!target.valid[i]) continue;
    target_points.push_back(target.points[i]);
    target_index.push_back(static_cast<std::uint32_t>(i));
  }
  if (target_points.empty())
    fail(ErrorCode::empty_target, "target pointmap has no valid pixels");

  // Tree indices follow ascending row-major order, so the tree's
  // lowest-index tie rule is exactly the lowest row-major pixel rule.
  KdTree3 tree(std::move(target_points));

  CorrespondenceMap phi;
  phi.width = source.width;
  phi.height = source.height;
  phi.target_width = target.width;
  phi.target_height = target.height;
  phi.target.assign(source.pixel_count(), 0);
  phi.defined.assign(source.pixel_count(), 0);

  parallel_chunks(static_cast<std::int64_t>(source.pixel_count()),
                  [&](std::int64_t begin, std::int64_t end) {
                    for (std::int64_t i = begin; i < end; ++i) {
                      if (!source.valid[i]) continue;
                      int hit = tree.nearest(source.points[i]);
                      phi.target[i] = target_index[hit];
                      phi.defined[i] = 1;
                    }
                  });
  return phi;
}

std::size_t masked_overlap(std::uint32_t mask_a_id, const LabeledMaskSet& masks_a,
                           std::uint32_t mask_b_id, const LabeledMaskSet& masks_b,
                           const CorrespondenceMap& phi) {
  if (masks_a.width != phi.width || masks_a.height != phi.height)
    fail(ErrorCode::invalid_input, "mask dimensions do not match correspondence");
  if (masks_b.width != phi.target_width || masks_b.height != phi.target_height)
    fail(ErrorCode::invalid_input, "target mask does not match correspondence");
  std::size_t count = 0;
  for (std::size_t i = 0; i < masks_a.pixel_count(); ++i) {
    if (masks_a.ids[i] != mask_a_id || !phi.defined[i]) continue;
    if (masks_b.ids[phi.target[i]] == mask_b_id) ++count;
  }
  return count;
}

double matching_cost(std::size_t overlap, std::size_t size_a, std::size_t size_b) {
  if (size_a < 1 || size_b < 1)
    fail(ErrorCode::invalid_input, "mask sizes must be at least 1");
  std::size_t smaller = std::min(size_a, size_b);
  if (overlap > smaller)
    fail(ErrorCode::invalid_input, "overlap exceeds the smaller mask");
  return 1.0 - static_cast<double>(overlap) / static_cast<double>(smaller);
}

namespace {

// Joint histogram of (source id, target id) over phi-defined pixels, plus
// full per-id pixel counts for both mask sets.
struct OverlapTable {
  std::vector<std::uint32_t> a_ids, b_ids;
  std::vector<std::size_t> a_sizes, b_sizes;
  // overlap[a_slot * b_ids.size() + b_slot]
  std::vector<std::size_t> overlap;
};

OverlapTable count_overlaps(const LabeledMaskSet& masks_a,
                            const LabeledMaskSet& masks_b,
                            const CorrespondenceMap& phi) {
  OverlapTable t;
  t.a_ids = masks_a.id_list;
  t.b_ids = masks_b.id_list;
  std::unordered_map<std::uint32_t, int> a_slot, b_slot;
  for (std::size_t i = 0; i < t.a_ids.size(); ++i) a_slot[t.a_ids[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < t.b_ids.size(); ++i) b_slot[t.b_ids[i]] = static_cast<int>(i);
  t.a_sizes.assign(t.a_ids.size(), 0);
  t.b_sizes.assign(t.b_ids.size(), 0);
  t.overlap.assign(t.a_ids.size() * t.b_ids.size(), 0);

  for (std::size_t i = 0; i < masks_a.pixel_count(); ++i) {
    std::uint32_t a = masks_a.ids[i];
    if (a != 0) ++t.a_sizes[a_slot[a]];
  }
  for (std::size_t i = 0; i < masks_b.pixel_count(); ++i) {
    std::uint32_t b = masks_b.ids[i];
    if (b != 0) ++t.b_sizes[b_slot[b]];
  }
  for (std::size_t i = 0; i < masks_a.pixel_count(); ++i) {
    std::uint32_t a = masks_a.ids[i];
    if (a == 0 || !phi.defined[i]) continue;
    std::uint32_t b = masks_b.ids[phi.target[i]];
    if (b == 0) continue;
    ++t.overlap[a_slot[a] * t.b_ids.size() + b_slot[b]];
  }
  return t;
}

// Virtual mask for accumulated mode: each valid pixel takes the label of
// the nearest accumulated point within assoc_radius, else 0 (unseen).
LabeledMaskSet render_virtual_mask(const Pointmap& pm, const KdTree3& cloud_tree,
                                   const std::vector<std::uint32_t>& cloud_labels,
                                   double assoc_radius) {
  LabeledMaskSet mask(pm.width, pm.height);
  const double radius2 = assoc_radius * assoc_radius;
  parallel_chunks(static_cast<std::int64_t>(pm.pixel_count()),
                  [&](std::int64_t begin, std::int64_t end) {
                    for (std::int64_t i = begin; i < end; ++i) {
                      if (!pm.valid[i]) continue;
                      double d2 = 0.0;
                      int hit = cloud_tree.nearest(pm.points[i], &d2);
                      if (hit >= 0 && d2 <= radius2)
                        mask.ids[i] = cloud_labels[hit];
                    }
                  });
  mask.rebuild_id_list();
  return mask;
}

CorrespondenceMap identity_phi(int width, int height) {
  CorrespondenceMap phi;
  phi.width = phi.target_width = width;
  phi.height = phi.target_height = height;
  std::size_t n = static_cast<std::size_t>(width) * height;
  phi.target.resize(n);
  phi.defined.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) phi.target[i] = static_cast<std::uint32_t>(i);
  return phi;
}

}  // namespace

AssociationResult associate_sequence(
    const std::vector<std::pair<Pointmap, LabeledMaskSet>>& frames,
    const AssociationConfig& config) {
  if (frames.empty())
    fail(ErrorCode::invalid_input, "associate_sequence needs at least one frame");
  for (const auto& [pm, mask] : frames) {
    pm.validate();
    if (mask.width != pm.width || mask.height != pm.height)
      fail(ErrorCode::invalid_input, "mask and pointmap dimensions differ");
  }

  AssociationResult result;
  result.masks.reserve(frames.size());
  std::uint32_t next_fresh_id = 1;

  auto append_labeled_pixels = [&](const Pointmap& pm, const LabeledMaskSet& mask,
                                   std::uint32_t frame_index) {
    for (std::size_t i = 0; i < pm.pixel_count(); ++i)
      if (mask.ids[i] != 0 && pm.valid[i])
        result.cloud.append(pm.points[i], mask.ids[i], frame_index);
  };

  for (std::size_t t = 0; t < frames.size(); ++t) {
    const Pointmap& pm = frames[t].first;
    const LabeledMaskSet& raw = frames[t].second;

    LabeledMaskSet relabeled(raw.width, raw.height);
    std::unordered_map<std::uint32_t, std::uint32_t> remap;  // raw id -> global

    if (t == 0 && config.mode != AssociationMode::independent) {
      // First frame adopts its own ids as global ids.
      for (std::uint32_t id : raw.id_list) remap[id] = id;
      for (std::uint32_t id : raw.id_list)
        next_fresh_id = std::max(next_fresh_id, id + 1);
    } else if (config.mode == AssociationMode::independent) {
      for (std::uint32_t id : raw.id_list)
        if (raw.mask_size(id) >= config.min_mask_pixels) remap[id] = next_fresh_id++;
    } else {
      // Reference side (rows): previous relabeled masks under the pointmap
      // correspondence, or the virtual mask rendered from the fused cloud
      // on the current grid. New side (cols): this frame's raw masks.
      LabeledMaskSet reference_masks;
      CorrespondenceMap phi;
      if (config.mode == AssociationMode::adjacent) {
        reference_masks = result.masks[t - 1];
        phi = build_correspondence(frames[t - 1].first, pm);
      } else {
        KdTree3 cloud_tree(result.cloud.positions);
        reference_masks = render_virtual_mask(pm, cloud_tree, result.cloud.labels,
                                              config.assoc_radius);
        phi = identity_phi(pm.width, pm.height);
      }

      OverlapTable table = count_overlaps(reference_masks, raw, phi);
      CostMatrix costs(static_cast<int>(table.a_ids.size()),
                       static_cast<int>(table.b_ids.size()));
      for (std::size_t a = 0; a < table.a_ids.size(); ++a) {
        for (std::size_t b = 0; b < table.b_ids.size(); ++b) {
          // phi can be many-to-one, so clamp the raw pixel count before
          // the cost's overlap <= min(sizes) precondition.
          std::size_t smaller = std::min(table.a_sizes[a], table.b_sizes[b]);
          std::size_t ov = std::min(table.overlap[a * table.b_ids.size() + b], smaller);
          costs.at(static_cast<int>(a), static_cast<int>(b)) =
              matching_cost(ov, table.a_sizes[a], table.b_sizes[b]);
        }
      }
      PartialAssignment assignment = solve_assignment(costs, config.reject_above);
      for (auto [a, b] : assignment.pairs) remap[table.b_ids[b]] = table.a_ids[a];
      for (int b : assignment.unmatched_cols) {
        std::uint32_t raw_id = table.b_ids[b];
        if (table.b_sizes[b] >= config.min_mask_pixels)
          remap[raw_id] = next_fresh_id++;
        // smaller unmatched masks stay unlabeled
      }
    }

    for (std::size_t i = 0; i < raw.pixel_count(); ++i) {
      auto it = raw.ids[i] == 0 ? remap.end() : remap.find(raw.ids[i]);
      relabeled.ids[i] = it == remap.end() ? 0 : it->second;
    }
    relabeled.rebuild_id_list();
    for (std::uint32_t id : relabeled.id_list)
      next_fresh_id = std::max(next_fresh_id, id + 1);

    append_labeled_pixels(pm, relabeled, static_cast<std::uint32_t>(t));
    result.masks.push_back(std::move(relabeled));
  }
  return result;
}

}  // namespace segsplat
