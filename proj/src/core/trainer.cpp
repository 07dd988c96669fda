// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/losses.hpp"
#include "core/plane.hpp"
#include "core/rng.hpp"

namespace segsplat {

void TrainingConfig::validate() const {
  if (iterations < 0) fail(ErrorCode::invalid_input, "iterations must be >= 0");
  if (lambda_plane < 0 || lambda_2d < 0 || lambda_3d < 0)
    fail(ErrorCode::invalid_input, "loss weights must be non-negative");
  if (lambda_dssim < 0 || lambda_dssim > 1)
    fail(ErrorCode::invalid_input, "lambda_dssim must lie in [0,1]");
  if (neighbor_count < 3)
    fail(ErrorCode::invalid_input, "neighbor count must be at least 3");
  if (plane_refresh_interval < 1 || densify_interval < 1)
    fail(ErrorCode::invalid_input, "intervals must be at least 1");
}

namespace {

// Adam moments for one parameter block of `dim` doubles per splat.
struct AdamState {
  std::vector<double> m, v;
  int dim = 1;

  void init(std::size_t count, int d) {
    dim = d;
    m.assign(count * d, 0.0);
    v.assign(count * d, 0.0);
  }
  void remap(const std::vector<int>& source, const std::vector<bool>& is_new) {
    std::vector<double> nm(source.size() * dim, 0.0), nv(source.size() * dim, 0.0);
    for (std::size_t i = 0; i < source.size(); ++i) {
      if (is_new[i]) continue;
      for (int d = 0; d < dim; ++d) {
        nm[i * dim + d] = m[static_cast<std::size_t>(source[i]) * dim + d];
        nv[i * dim + d] = v[static_cast<std::size_t>(source[i]) * dim + d];
      }
    }
    m = std::move(nm);
    v = std::move(nv);
  }
  void keep(const std::vector<int>& kept) {
    std::vector<double> nm(kept.size() * dim), nv(kept.size() * dim);
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (int d = 0; d < dim; ++d) {
        nm[i * dim + d] = m[static_cast<std::size_t>(kept[i]) * dim + d];
        nv[i * dim + d] = v[static_cast<std::size_t>(kept[i]) * dim + d];
      }
    m = std::move(nm);
    v = std::move(nv);
  }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

inline double adam_step(AdamState& state, std::size_t slot, double grad,
                        double lr, double bias1, double bias2) {
  double& m = state.m[slot];
  double& v = state.v[slot];
  m = kBeta1 * m + (1.0 - kBeta1) * grad;
  v = kBeta2 * v + (1.0 - kBeta2) * grad * grad;
  double mhat = m / bias1;
  double vhat = v / bias2;
  return -lr * mhat / (std::sqrt(vhat) + kEps);
}

double scene_extent(const GaussianField& field) {
  Vec3 lo = field.splats.front().position, hi = lo;
  for (const auto& s : field.splats) {
    lo = lo.cwiseMin(s.position);
    hi = hi.cwiseMax(s.position);
  }
  double d = (hi - lo).norm();
  return d > 0.0 ? d : 1.0;
}

}  // namespace

void write_loss_log(const std::string& path, const std::vector<TrainLogRow>& log) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot open loss log: " + path);
  out << "iteration,l_img,l_2d,l_3d,l_plane,total,splat_count\n";
  char buf[512];
  for (const TrainLogRow& row : log) {
    std::snprintf(buf, sizeof(buf),
                  "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", row.iteration,
                  row.l_img, row.l_2d, row.l_3d, row.l_plane, row.total,
                  row.splat_count);
    out << buf;
  }
}

TrainResult train(GaussianField field, const std::vector<TrainView>& views,
                  const TrainingConfig& config) {
  config.validate();
  if (views.empty()) fail(ErrorCode::invalid_input, "train needs at least one view");
  if (field.splats.empty())
    fail(ErrorCode::invalid_input, "train needs a non-empty field");

  TrainResult result;
  if (config.iterations == 0) {
    result.field = std::move(field);
    return result;
  }

  const double extent = scene_extent(field);
  const double lr_position = config.lr_position_rel * extent;
  const double scale_threshold = config.scale_threshold_rel * extent;
  const long densify_stop =
      config.densify_stop > 0 ? config.densify_stop : config.iterations / 2;

  // Per-view compact class targets; ids unknown to the field stay unlabeled.
  std::vector<std::vector<int>> targets(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) {
    const LabeledMaskSet& mask = views[v].mask;
    targets[v].assign(mask.pixel_count(), 0);
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
      if (mask.ids[i] == 0) continue;
      int cls = field.compact_class(mask.ids[i]);
      if (cls > 0) targets[v][i] = cls;
    }
  }

  AdamState st_position, st_opacity, st_scale, st_color, st_identity;
  AdamState st_weights, st_bias;
  st_position.init(field.size(), 3);
  st_opacity.init(field.size(), 1);
  st_scale.init(field.size(), 1);
  st_color.init(field.size(), 3);
  st_identity.init(field.size(), kIdentityDim);
  st_weights.init(field.classifier.weights.size(), 1);
  st_bias.init(field.classifier.bias.size(), 1);

  std::vector<double> grad_accum(field.size(), 0.0);
  std::vector<long> grad_count(field.size(), 0);

  PlaneSet planes;
  bool planes_stale = true;

  auto dump_diagnostics = [&] {
    if (config.diagnostic_dir.empty()) return;
    std::filesystem::create_directories(config.diagnostic_dir);
    write_field_splats(config.diagnostic_dir + "/diverged_field.ply", field);
    write_loss_log(config.diagnostic_dir + "/diverged_loss_log.csv", result.log);
  };

  for (long it = 1; it <= config.iterations; ++it) {
    if (planes_stale || (it - 1) % config.plane_refresh_interval == 0) {
      planes = fit_planes(field.positions(), field.labels(),
                          config.neighbor_count, it);
      planes_stale = false;
    }

    const std::size_t view_idx = static_cast<std::size_t>((it - 1) % views.size());
    const TrainView& view = views[view_idx];

    RenderCache cache;
    RenderOutput rendered = render(field, view.camera, &cache);

    ImageLossResult img = loss_img(rendered.color, view.image, config.lambda_dssim);
    Ce2dResult ce2d = loss_2d(rendered.feature, view.camera.width,
                              view.camera.height, field.classifier,
                              targets[view_idx]);
    Ce3dResult ce3d = loss_3d(field);
    std::vector<Vec3> positions = field.positions();
    PlaneLossResult pl = plane_loss(positions, planes);

    TrainLogRow row;
    row.iteration = it;
    row.l_img = img.loss;
    row.l_2d = ce2d.loss;
    row.l_3d = ce3d.loss;
    row.l_plane = pl.loss;
    row.total = img.loss + config.lambda_plane * pl.loss +
                config.lambda_2d * ce2d.loss + config.lambda_3d * ce3d.loss;
    row.splat_count = field.size();
    result.log.push_back(row);

    if (!std::isfinite(row.total)) {
      dump_diagnostics();
      fail(ErrorCode::diverged,
           "non-finite loss at iteration " + std::to_string(it));
    }

    // Feature gradient carries the 2d weight into the compositing backward.
    std::vector<double> d_feature(ce2d.d_feature.size(), 0.0);
    if (config.lambda_2d != 0.0)
      for (std::size_t i = 0; i < d_feature.size(); ++i)
        d_feature[i] = config.lambda_2d * ce2d.d_feature[i];
    RenderGrads rg = render_backward(field, view.camera, cache, img.d_image,
                                     config.lambda_2d != 0.0
                                         ? d_feature
                                         : std::vector<double>());

    const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(it));
    const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(it));

    for (std::size_t i = 0; i < field.size(); ++i) {
      GaussianSplat& s = field.splats[i];
      Vec3 g_pos = rg.d_position[i] + config.lambda_plane * pl.gradient[i];
      for (int d = 0; d < 3; ++d)
        s.position[d] += adam_step(st_position, i * 3 + d, g_pos[d],
                                   lr_position, bias1, bias2);
      s.raw_opacity += adam_step(st_opacity, i, rg.d_raw_opacity[i],
                                 config.lr_opacity, bias1, bias2);
      s.raw_scale += adam_step(st_scale, i, rg.d_raw_scale[i], config.lr_scale,
                               bias1, bias2);
      for (int d = 0; d < 3; ++d) {
        double nc = s.color[d] + adam_step(st_color, i * 3 + d, rg.d_color[i][d],
                                           config.lr_color, bias1, bias2);
        s.color[d] = std::clamp(nc, 0.0, 1.0);
      }
      for (int d = 0; d < kIdentityDim; ++d) {
        // d_feature fed to the backward pass already carried lambda_2d.
        double g = rg.d_identity[i][d] + config.lambda_3d * ce3d.d_identity[i][d];
        s.identity[d] += adam_step(st_identity, i * kIdentityDim + d, g,
                                   config.lr_identity, bias1, bias2);
      }
      grad_accum[i] += rg.screen_grad_norm[i];
      if (rg.screen_grad_norm[i] > 0.0) ++grad_count[i];
    }
    for (std::size_t i = 0; i < field.classifier.weights.size(); ++i) {
      double g = config.lambda_2d * ce2d.d_weights[i] +
                 config.lambda_3d * ce3d.d_weights[i];
      field.classifier.weights[i] +=
          adam_step(st_weights, i, g, config.lr_classifier, bias1, bias2);
    }
    for (std::size_t i = 0; i < field.classifier.bias.size(); ++i) {
      double g = config.lambda_2d * ce2d.d_bias[i] +
                 config.lambda_3d * ce3d.d_bias[i];
      field.classifier.bias[i] +=
          adam_step(st_bias, i, g, config.lr_classifier, bias1, bias2);
    }

    const bool densify_now = it >= config.densify_start && it <= densify_stop &&
                             it % config.densify_interval == 0;
    if (densify_now) {
      std::vector<double> avg(field.size(), 0.0);
      for (std::size_t i = 0; i < field.size(); ++i)
        if (grad_count[i] > 0)
          avg[i] = grad_accum[i] / static_cast<double>(grad_count[i]);
      PlaneSet empty;
      DensifyResult dres =
          densify(field, avg, config.densify_grad_threshold, scale_threshold,
                  config.split_projection ? planes : empty,
                  mix_seed(config.seed, static_cast<std::uint64_t>(it)));
      st_position.remap(dres.source_index, dres.is_new);
      st_opacity.remap(dres.source_index, dres.is_new);
      st_scale.remap(dres.source_index, dres.is_new);
      st_color.remap(dres.source_index, dres.is_new);
      st_identity.remap(dres.source_index, dres.is_new);
      field = std::move(dres.field);

      PruneResult pres = prune(field, config.opacity_floor);
      st_position.keep(pres.kept);
      st_opacity.keep(pres.kept);
      st_scale.keep(pres.kept);
      st_color.keep(pres.kept);
      st_identity.keep(pres.kept);
      field = std::move(pres.field);
      if (field.splats.empty()) {
        dump_diagnostics();
        fail(ErrorCode::diverged,
             "all splats pruned at iteration " + std::to_string(it));
      }

      grad_accum.assign(field.size(), 0.0);
      grad_count.assign(field.size(), 0);
      planes_stale = true;  // new splats need planes immediately
    }
  }

  result.field = std::move(field);
  return result;
}

}  // namespace segsplat
