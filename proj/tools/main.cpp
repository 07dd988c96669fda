// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
//
// Subcommand front-end over the segsplat C API. One JSON config file drives
// every stage; individual flags override single values. Failures print one
// machine-parseable JSON line to stderr and exit with the status code.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "segsplat/segsplat.h"

namespace {

using nlohmann::json;

int fail_with(segsplat_status status) {
  json line;
  line["error"] = segsplat_last_error();
  line["status"] = static_cast<int>(status);
  std::cerr << line.dump() << "\n";
  return static_cast<int>(status);
}

int fail_with(const std::string& message, int status = 1) {
  json line;
  line["error"] = message;
  line["status"] = status;
  std::cerr << line.dump() << "\n";
  return status;
}

struct ConfigOverrides {
  std::optional<std::string> mode;
  std::optional<double> reject_above;
  std::optional<double> assoc_radius;
  std::optional<bool> pointmap_fusion;
  std::optional<long> iterations;
  std::optional<double> lambda_plane;
  std::optional<double> lambda_2d;
  std::optional<double> lambda_3d;
  std::optional<int> neighbor_count;
  std::optional<bool> split_projection;
  std::optional<std::uint64_t> seed;
  std::optional<double> gamma;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--mode", mode,
                    "association mode: accumulated, adjacent or independent");
    cmd->add_option("--reject-above", reject_above, "association cost threshold");
    cmd->add_option("--assoc-radius", assoc_radius,
                    "fused-cloud lookup radius (scene units)");
    cmd->add_option("--pointmap-fusion", pointmap_fusion,
                    "false switches to per-frame independent ids");
    cmd->add_option("--iterations", iterations, "training iterations");
    cmd->add_option("--lambda-plane", lambda_plane, "plane loss weight");
    cmd->add_option("--lambda-2d", lambda_2d, "2d segmentation loss weight");
    cmd->add_option("--lambda-3d", lambda_3d, "3d segmentation loss weight");
    cmd->add_option("--neighbors", neighbor_count,
                    "same-class neighbor count for plane fits");
    cmd->add_option("--split-projection", split_projection,
                    "project split children onto their plane");
    cmd->add_option("--seed", seed, "training seed");
    cmd->add_option("--gamma", gamma, "3d metric distance cutoff");
  }

  // Merged config JSON text: file (if any) + flag overrides.
  std::string merged(const std::string& config_path) const {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open config: " + config_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      j = json::parse(ss.str(), nullptr, false);
      if (j.is_discarded())
        throw std::runtime_error("malformed JSON config: " + config_path);
    }
    if (mode) j["association"]["mode"] = *mode;
    if (reject_above) j["association"]["reject_above"] = *reject_above;
    if (assoc_radius) j["association"]["assoc_radius"] = *assoc_radius;
    if (pointmap_fusion) j["association"]["pointmap_fusion"] = *pointmap_fusion;
    if (iterations) j["training"]["iterations"] = *iterations;
    if (lambda_plane) j["training"]["lambda_plane"] = *lambda_plane;
    if (lambda_2d) j["training"]["lambda_2d"] = *lambda_2d;
    if (lambda_3d) j["training"]["lambda_3d"] = *lambda_3d;
    if (neighbor_count) j["training"]["neighbor_count"] = *neighbor_count;
    if (split_projection) j["training"]["split_projection"] = *split_projection;
    if (seed) j["training"]["seed"] = *seed;
    if (gamma) j["eval"]["gamma"] = *gamma;
    return j.dump();
  }
};

void print_report_line(const char* key, double value) {
  std::cout << key << " " << value << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pointmap mask association and plane-constrained gaussian "
               "segmentation fields"};
  app.require_subcommand(1);
  app.set_version_flag("--version", segsplat_version());

  std::string spec_path, scene_dir, out_dir, config_path, pred_dir, field_path;
  std::string report_prefix, op, pose_path, out_prefix;
  std::uint64_t gen_seed = 0;
  std::uint32_t object_id = 0;
  std::vector<double> translation;
  int frame_index = -1;
  ConfigOverrides overrides;

  CLI::App* gen = app.add_subcommand("gen-scene", "generate a synthetic scene");
  gen->add_option("--spec", spec_path, "scene spec JSON file")->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", out_dir, "output scene directory")->required();

  CLI::App* assoc = app.add_subcommand("associate", "associate masks across frames");
  assoc->add_option("--scene", scene_dir, "scene directory")->required();
  assoc->add_option("--config", config_path, "run config JSON file");
  assoc->add_option("--out", out_dir, "output directory")->required();
  overrides.add_flags(assoc);

  CLI::App* train = app.add_subcommand("train", "optimize a segmentation field");
  train->add_option("--scene", scene_dir, "scene directory")->required();
  train->add_option("--config", config_path, "run config JSON file");
  train->add_option("--out", out_dir, "output directory")->required();
  overrides.add_flags(train);

  CLI::App* eval2d = app.add_subcommand("eval2d", "mask metrics against ground truth");
  eval2d->add_option("--pred", pred_dir, "directory with mask_%04d.pgm")->required();
  eval2d->add_option("--scene", scene_dir, "scene directory")->required();
  eval2d->add_option("--config", config_path, "run config JSON file");
  eval2d->add_option("--report", report_prefix, "report path prefix");
  overrides.add_flags(eval2d);

  CLI::App* eval3d = app.add_subcommand("eval3d", "field metrics against the gt cloud");
  eval3d->add_option("--field", field_path, "field ply path")->required();
  eval3d->add_option("--scene", scene_dir, "scene directory")->required();
  eval3d->add_option("--config", config_path, "run config JSON file");
  eval3d->add_option("--report", report_prefix, "report path prefix");
  overrides.add_flags(eval3d);

  CLI::App* edit = app.add_subcommand("edit", "delete or move one object");
  edit->add_option("--field", field_path, "input field ply")->required();
  edit->add_option("--op", op, "delete or move")->required();
  edit->add_option("--id", object_id, "global object id")->required();
  edit->add_option("--translation", translation, "dx dy dz for move")
      ->expected(3);
  edit->add_option("--out", out_dir, "output field ply")->required();

  CLI::App* render = app.add_subcommand("render", "render color and argmax mask");
  render->add_option("--field", field_path, "field ply path")->required();
  render->add_option("--scene", scene_dir, "scene directory (with --frame)");
  render->add_option("--frame", frame_index, "trajectory frame index");
  render->add_option("--pose", pose_path, "pose JSON file");
  render->add_option("--out", out_prefix, "output path prefix")->required();

  CLI11_PARSE(app, argc, argv);

  std::string config;
  try {
    config = overrides.merged(config_path);
  } catch (const std::exception& e) {
    return fail_with(e.what());
  }

  if (gen->parsed()) {
    segsplat_status s = segsplat_generate_scene(spec_path.c_str(), gen_seed,
                                                out_dir.c_str());
    return s == SEGSPLAT_OK ? 0 : fail_with(s);
  }

  if (assoc->parsed()) {
    segsplat_status s = segsplat_associate(scene_dir.c_str(), config.c_str(),
                                           out_dir.c_str());
    return s == SEGSPLAT_OK ? 0 : fail_with(s);
  }

  if (train->parsed()) {
    segsplat_status s =
        segsplat_train(scene_dir.c_str(), config.c_str(), out_dir.c_str());
    return s == SEGSPLAT_OK ? 0 : fail_with(s);
  }

  if (eval2d->parsed()) {
    double miou_s = 0, miou_m = 0;
    segsplat_status s = segsplat_eval2d(
        pred_dir.c_str(), scene_dir.c_str(), config.c_str(),
        report_prefix.empty() ? nullptr : report_prefix.c_str(), &miou_s,
        &miou_m);
    if (s != SEGSPLAT_OK) return fail_with(s);
    print_report_line("miou_s", miou_s);
    print_report_line("miou_m", miou_m);
    return 0;
  }

  if (eval3d->parsed()) {
    double miou_3d = 0, chamfer = 0;
    segsplat_status s = segsplat_eval3d(
        field_path.c_str(), scene_dir.c_str(), config.c_str(),
        report_prefix.empty() ? nullptr : report_prefix.c_str(), &miou_3d,
        &chamfer);
    if (s != SEGSPLAT_OK) return fail_with(s);
    print_report_line("miou_3d", miou_3d);
    print_report_line("chamfer", chamfer);
    return 0;
  }

  if (edit->parsed()) {
    segsplat_field* field = nullptr;
    segsplat_status s = segsplat_field_load(field_path.c_str(), &field);
    if (s != SEGSPLAT_OK) return fail_with(s);
    if (op == "delete") {
      s = segsplat_field_delete_object(field, object_id);
    } else if (op == "move") {
      if (translation.size() != 3) {
        segsplat_field_free(field);
        return fail_with("move needs --translation dx dy dz");
      }
      s = segsplat_field_move_object(field, object_id, translation.data());
    } else {
      segsplat_field_free(field);
      return fail_with("unknown edit op: " + op);
    }
    if (s == SEGSPLAT_WARN_UNKNOWN_ID) {
      std::cerr << "warning: " << segsplat_last_error() << "\n";
    } else if (s != SEGSPLAT_OK) {
      segsplat_field_free(field);
      return fail_with(s);
    }
    s = segsplat_field_save(field, out_dir.c_str());
    segsplat_field_free(field);
    return s == SEGSPLAT_OK ? 0 : fail_with(s);
  }

  if (render->parsed()) {
    segsplat_field* field = nullptr;
    segsplat_status s = segsplat_field_load(field_path.c_str(), &field);
    if (s != SEGSPLAT_OK) return fail_with(s);
    if (!pose_path.empty()) {
      s = segsplat_field_render_pose(field, pose_path.c_str(), out_prefix.c_str());
    } else if (!scene_dir.empty() && frame_index >= 0) {
      s = segsplat_field_render(field, scene_dir.c_str(), frame_index,
                                out_prefix.c_str());
    } else {
      segsplat_field_free(field);
      return fail_with("render needs --pose or --scene with --frame");
    }
    segsplat_field_free(field);
    return s == SEGSPLAT_OK ? 0 : fail_with(s);
  }

  return fail_with("no subcommand", 1);
}
