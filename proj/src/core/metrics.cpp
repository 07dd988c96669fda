// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "core/assignment.hpp"
#include "core/error.hpp"
#include "core/kdtree.hpp"
#include "core/parallel.hpp"

namespace segsplat {

void IoUAccumulator::add_view(const LabeledMaskSet& pred,
                              const LabeledMaskSet& gt) {
  if (pred.width != gt.width || pred.height != gt.height)
    fail(ErrorCode::invalid_input, "mask dimensions do not match");
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    std::uint32_t p = pred.ids[i];
    std::uint32_t g = gt.ids[i];
    if (p != 0) ++pred_pixels[p];
    if (g != 0) ++gt_pixels[g];
    if (p != 0 && g != 0) ++intersection[{p, g}];
  }
}

double IoUAccumulator::mean_matched_iou() const {
  if (gt_pixels.empty())
    fail(ErrorCode::undefined_metric, "ground truth has no masks");
  std::vector<std::uint32_t> pred_ids, gt_ids;
  for (auto& [id, n] : pred_pixels) pred_ids.push_back(id);
  for (auto& [id, n] : gt_pixels) gt_ids.push_back(id);

  CostMatrix costs(static_cast<int>(pred_ids.size()),
                   static_cast<int>(gt_ids.size()), 1.0);
  std::vector<double> iou(costs.values.size(), 0.0);
  for (int r = 0; r < costs.rows; ++r) {
    for (int c = 0; c < costs.cols; ++c) {
      auto it = intersection.find({pred_ids[r], gt_ids[c]});
      std::size_t inter = it == intersection.end() ? 0 : it->second;
      std::size_t uni = pred_pixels.at(pred_ids[r]) + gt_pixels.at(gt_ids[c]) - inter;
      double v = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
      iou[static_cast<std::size_t>(r) * costs.cols + c] = v;
      costs.at(r, c) = 1.0 - v;
    }
  }
  PartialAssignment match = solve_assignment(costs, 1.0);
  double total = 0.0;
  for (auto [r, c] : match.pairs)
    total += iou[static_cast<std::size_t>(r) * costs.cols + c];
  return total / static_cast<double>(gt_ids.size());
}

double miou_single(const LabeledMaskSet& pred, const LabeledMaskSet& gt) {
  IoUAccumulator acc;
  acc.add_view(pred, gt);
  return acc.mean_matched_iou();
}

double miou_multi(const std::vector<LabeledMaskSet>& preds,
                  const std::vector<LabeledMaskSet>& gts) {
  if (preds.size() != gts.size())
    fail(ErrorCode::invalid_input, "mask list lengths differ");
  if (preds.empty())
    fail(ErrorCode::undefined_metric, "no views to evaluate");
  IoUAccumulator acc;
  for (std::size_t v = 0; v < preds.size(); ++v)
    acc.add_view(preds[v], gts[v]);
  return acc.mean_matched_iou();
}

double miou_3d(const GaussianField& field, const SegmentedPointCloud& gt_cloud,
               double gamma) {
  if (gt_cloud.size() == 0)
    fail(ErrorCode::undefined_metric, "ground-truth cloud is empty");
  if (gamma <= 0.0)
    fail(ErrorCode::invalid_input, "gamma must be positive");
  if (field.size() == 0)
    fail(ErrorCode::invalid_input, "field is empty");

  // Transferred gt label per splat; 0 is the reserved no-category label.
  KdTree3 tree(gt_cloud.positions);
  const double gamma2 = gamma * gamma;
  std::vector<std::uint32_t> transferred(field.size(), 0);
  parallel_chunks(static_cast<std::int64_t>(field.size()),
                  [&](std::int64_t begin, std::int64_t end) {
                    for (std::int64_t i = begin; i < end; ++i) {
                      double d2 = 0.0;
                      int hit = tree.nearest(field.splats[i].position, &d2);
                      if (hit >= 0 && d2 <= gamma2)
                        transferred[i] = gt_cloud.labels[hit];
                    }
                  });

  // Predicted label: classifier argmax mapped to the global id space.
  std::vector<std::uint32_t> predicted(field.size(), 0);
  const int k = field.class_count();
  std::vector<double> logits(k);
  for (std::size_t i = 0; i < field.size(); ++i) {
    field.classifier.logits(field.splats[i].identity.data(), logits.data());
    int best = 0;
    for (int c = 1; c < k; ++c)
      if (logits[c] > logits[best]) best = c;
    predicted[i] = field.class_to_global[best];
  }

  // Pred/gt ids live in different spaces; align them like the 2D metrics,
  // then average per-splat IoU over the gt classes present. The reserved
  // no-category label never appears among predictions, so floaters only
  // enlarge unions.
  std::set<std::uint32_t> gt_classes(gt_cloud.labels.begin(), gt_cloud.labels.end());
  std::set<std::uint32_t> pred_classes;
  for (std::uint32_t p : predicted)
    if (p != 0) pred_classes.insert(p);

  std::vector<std::uint32_t> pred_ids(pred_classes.begin(), pred_classes.end());
  std::vector<std::uint32_t> gt_ids(gt_classes.begin(), gt_classes.end());
  std::map<std::uint32_t, int> pred_slot, gt_slot;
  for (std::size_t i = 0; i < pred_ids.size(); ++i) pred_slot[pred_ids[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < gt_ids.size(); ++i) gt_slot[gt_ids[i]] = static_cast<int>(i);

  std::vector<std::size_t> inter(pred_ids.size() * gt_ids.size(), 0);
  std::vector<std::size_t> pred_count(pred_ids.size(), 0);
  std::vector<std::size_t> gt_count(gt_ids.size(), 0);
  for (std::size_t i = 0; i < field.size(); ++i) {
    std::uint32_t p = predicted[i];
    std::uint32_t g = transferred[i];
    if (p != 0) ++pred_count[pred_slot[p]];
    if (g != 0) ++gt_count[gt_slot.at(g)];
    if (p != 0 && g != 0)
      ++inter[static_cast<std::size_t>(pred_slot[p]) * gt_ids.size() + gt_slot.at(g)];
  }

  CostMatrix costs(static_cast<int>(pred_ids.size()),
                   static_cast<int>(gt_ids.size()), 1.0);
  std::vector<double> iou(costs.values.size(), 0.0);
  for (int r = 0; r < costs.rows; ++r) {
    for (int c = 0; c < costs.cols; ++c) {
      std::size_t in = inter[static_cast<std::size_t>(r) * gt_ids.size() + c];
      std::size_t uni = pred_count[r] + gt_count[c] - in;
      double v = uni == 0 ? 0.0 : static_cast<double>(in) / static_cast<double>(uni);
      iou[static_cast<std::size_t>(r) * costs.cols + c] = v;
      costs.at(r, c) = 1.0 - v;
    }
  }
  PartialAssignment match = solve_assignment(costs, 1.0);
  double total = 0.0;
  for (auto [r, c] : match.pairs)
    total += iou[static_cast<std::size_t>(r) * costs.cols + c];
  return total / static_cast<double>(gt_ids.size());
}

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty())
    fail(ErrorCode::invalid_input, "chamfer distance needs non-empty clouds");

  auto one_way = [](const std::vector<Vec3>& from, const KdTree3& to) {
    // Fixed-chunk partial sums keep the reduction order independent of the
    // worker count.
    const std::int64_t n = static_cast<std::int64_t>(from.size());
    const std::int64_t chunk = 4096;
    const std::int64_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<double> partial(n_chunks, 0.0);
    parallel_chunks(n_chunks, [&](std::int64_t begin, std::int64_t end) {
      for (std::int64_t c = begin; c < end; ++c) {
        double sum = 0.0;
        std::int64_t lo = c * chunk, hi = std::min(n, lo + chunk);
        for (std::int64_t i = lo; i < hi; ++i) {
          double d2 = 0.0;
          to.nearest(from[i], &d2);
          sum += std::sqrt(d2);
        }
        partial[c] = sum;
      }
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total / static_cast<double>(n);
  };

  KdTree3 tree_a(a), tree_b(b);
  return 0.5 * (one_way(a, tree_b) + one_way(b, tree_a));
}

SimilarityTransform procrustes_align(const std::vector<Vec3>& source,
                                     const std::vector<Vec3>& target) {
  if (source.size() != target.size() || source.size() < 3)
    fail(ErrorCode::invalid_input,
         "alignment needs >= 3 corresponding point pairs");
  const double n = static_cast<double>(source.size());
  Vec3 mu_s = Vec3::Zero(), mu_t = Vec3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    mu_s += source[i];
    mu_t += target[i];
  }
  mu_s /= n;
  mu_t /= n;

  Mat3 cov = Mat3::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    Vec3 ds = source[i] - mu_s;
    Vec3 dt = target[i] - mu_t;
    cov += dt * ds.transpose();
    var_s += ds.squaredNorm();
  }
  cov /= n;
  var_s /= n;
  if (var_s <= 0.0)
    fail(ErrorCode::invalid_input, "alignment source points are coincident");

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 sign = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0)
    sign(2, 2) = -1.0;

  SimilarityTransform t;
  t.rotation = svd.matrixU() * sign * svd.matrixV().transpose();
  t.scale = (svd.singularValues().asDiagonal() * sign).trace() / var_s;
  t.translation = mu_t - t.scale * (t.rotation * mu_s);
  return t;
}

double psnr(const Image& img, const Image& ref) {
  if (img.width != ref.width || img.height != ref.height ||
      img.channels != ref.channels)
    fail(ErrorCode::invalid_input, "image dimensions do not match");
  if (img.data.empty()) fail(ErrorCode::invalid_input, "images are empty");
  double mse = 0.0;
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    double d = img.data[i] - ref.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(img.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace segsplat
