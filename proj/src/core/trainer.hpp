// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "core/field.hpp"
#include "core/renderer.hpp"
#include "core/types.hpp"

namespace segsplat {

struct TrainingConfig {
  long iterations = 2000;
  double lambda_plane = 10.0;
  double lambda_2d = 1.0;
  double lambda_3d = 1.0;
  double lambda_dssim = 0.2;
  int neighbor_count = 10;
  long plane_refresh_interval = 1000;
  long densify_interval = 100;
  long densify_start = 500;
  long densify_stop = 0;  // 0: iterations / 2
  double densify_grad_threshold = 2e-4;
  double scale_threshold_rel = 0.01;  // fraction of scene extent
  double opacity_floor = 0.005;
  bool split_projection = true;
  std::uint64_t seed = 0;

  double lr_position_rel = 1.6e-4;  // scaled by scene extent
  double lr_opacity = 0.05;
  double lr_scale = 5e-3;
  double lr_color = 2.5e-3;
  double lr_identity = 2.5e-3;
  double lr_classifier = 2.5e-3;

  // When non-empty, a divergence abort dumps the field and loss log here.
  std::string diagnostic_dir;

  void validate() const;
};

struct TrainView {
  Image image;
  LabeledMaskSet mask;  // global ids
  Camera camera;
};

struct TrainLogRow {
  long iteration = 0;
  double l_img = 0, l_2d = 0, l_3d = 0, l_plane = 0, total = 0;
  std::size_t splat_count = 0;
};

struct TrainResult {
  GaussianField field;
  std::vector<TrainLogRow> log;
};

// Full optimization loop: round-robin views, Adam on splat parameters and
// the classifier, plane refresh on the configured interval (and after every
// densification), clone/split densification plus opacity pruning on the
// refinement interval. Total loss is
//   l_img + lambda_plane*l_plane + lambda_2d*l_2d + lambda_3d*l_3d.
// Throws Error(diverged) on a non-finite loss after dumping diagnostics.
TrainResult train(GaussianField field, const std::vector<TrainView>& views,
                  const TrainingConfig& config);

void write_loss_log(const std::string& path, const std::vector<TrainLogRow>& log);

}  // namespace segsplat
