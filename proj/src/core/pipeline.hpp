// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/association.hpp"
#include "core/field.hpp"
#include "core/synth.hpp"
#include "core/trainer.hpp"
#include "core/types.hpp"

namespace segsplat {

// One JSON config drives every subcommand; unknown keys are rejected so
// typos fail fast. Defaults match the documented experiment setup.
struct RunConfig {
  AssociationConfig association;
  bool pointmap_fusion = true;  // false: per-frame independent ids
  TrainingConfig training;
  double voxel_size = 0.02;
  double eval_gamma = 0.5;
};

RunConfig parse_run_config(const std::string& json_text);

// Scene spec JSON -> SceneSpec (trajectory may be an arc recipe or an
// explicit camera list).
SceneSpec parse_scene_spec(const std::string& json_text);

// Scene directory contents written by gen-scene and consumed downstream.
struct SceneDir {
  std::string root;
  SceneSpec spec;
  std::uint64_t seed = 0;
  std::vector<std::string> image_paths;
  std::vector<std::string> pointmap_paths;
  std::vector<std::string> gt_mask_paths;
  std::vector<std::string> raw_mask_paths;
  std::vector<Camera> cameras;
  std::string gt_cloud_path;
};

void generate_scene_dir(const std::string& spec_json_text, std::uint64_t seed,
                        const std::string& out_dir);
SceneDir read_scene_dir(const std::string& scene_dir);

// Runs associate_sequence over the scene's raw masks; writes
// mask_%04d.pgm and cloud.ply under out_dir.
AssociationResult run_association(const SceneDir& scene, const RunConfig& config);
void associate_cmd(const std::string& scene_dir, const RunConfig& config,
                   const std::string& out_dir);

// Association + field init + optimization; writes field.ply, the classifier
// sidecar and loss_log.csv under out_dir.
void train_cmd(const std::string& scene_dir, const RunConfig& config,
               const std::string& out_dir);

// Field artifact = PLY splats + JSON classifier sidecar ("<ply>.classifier.json").
void save_field(const std::string& ply_path, const GaussianField& field);
GaussianField load_field(const std::string& ply_path);

struct Eval2dReport {
  double miou_s = 0.0;
  double miou_m = 0.0;
  std::optional<double> psnr_mean;
  std::optional<double> ssim_mean;
};

// Compares pred_dir/mask_%04d.pgm against the scene's gt masks; when
// pred_dir also holds render_%04d.ppm, adds psnr/ssim means.
Eval2dReport eval2d_cmd(const std::string& pred_dir, const std::string& scene_dir,
                        const RunConfig& config,
                        const std::string& report_prefix);

struct Eval3dReport {
  double miou_3d = 0.0;
  double chamfer_distance = 0.0;
};

Eval3dReport eval3d_cmd(const std::string& field_path,
                        const std::string& scene_dir, const RunConfig& config,
                        const std::string& report_prefix);

// Renders color + argmax mask for one trajectory frame (out_prefix + ".ppm",
// "_mask.pgm") or for a pose JSON file.
void render_cmd(const GaussianField& field, const std::string& scene_dir,
                int frame_index, const std::string& out_prefix);
void render_pose_cmd(const GaussianField& field, const std::string& pose_json_path,
                     const std::string& out_prefix);

}  // namespace segsplat
