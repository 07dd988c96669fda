// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "segsplat/segsplat.h"

#include <exception>
#include <fstream>
#include <sstream>
#include <string>

#include "core/error.hpp"
#include "core/pipeline.hpp"

struct segsplat_field {
  segsplat::GaussianField rep;
};

namespace {

thread_local std::string g_last_error;

segsplat_status code_of(const segsplat::Error& e) {
  using segsplat::ErrorCode;
  switch (e.code()) {
    case ErrorCode::invalid_input: return SEGSPLAT_ERR_INVALID_INPUT;
    case ErrorCode::io_error: return SEGSPLAT_ERR_IO;
    case ErrorCode::format_error: return SEGSPLAT_ERR_FORMAT;
    case ErrorCode::empty_target: return SEGSPLAT_ERR_EMPTY_TARGET;
    case ErrorCode::degenerate_plane: return SEGSPLAT_ERR_DEGENERATE;
    case ErrorCode::undefined_metric: return SEGSPLAT_ERR_UNDEFINED_METRIC;
    case ErrorCode::diverged: return SEGSPLAT_ERR_DIVERGED;
    case ErrorCode::generation_failed: return SEGSPLAT_ERR_GENERATION;
  }
  return SEGSPLAT_ERR_UNKNOWN;
}

template <typename Fn>
segsplat_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const segsplat::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SEGSPLAT_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown failure";
    return SEGSPLAT_ERR_UNKNOWN;
  }
}

segsplat_status require(const void* p, const char* what) {
  if (p) return SEGSPLAT_OK;
  g_last_error = std::string(what) + " must not be NULL";
  return SEGSPLAT_ERR_INVALID_INPUT;
}

segsplat::RunConfig config_from(const char* config_json) {
  if (!config_json || config_json[0] == '\0')
    return segsplat::RunConfig{};
  return segsplat::parse_run_config(config_json);
}

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    segsplat::fail(segsplat::ErrorCode::io_error,
                   std::string("cannot open: ") + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

extern "C" {

const char* segsplat_version(void) { return "0.1.0"; }

const char* segsplat_last_error(void) { return g_last_error.c_str(); }

segsplat_status segsplat_generate_scene(const char* spec_json_path,
                                        uint64_t seed, const char* out_dir) {
  if (auto s = require(spec_json_path, "spec_json_path")) return s;
  if (auto s = require(out_dir, "out_dir")) return s;
  return guarded([&] {
    segsplat::generate_scene_dir(read_file(spec_json_path), seed, out_dir);
    return SEGSPLAT_OK;
  });
}

segsplat_status segsplat_associate(const char* scene_dir,
                                   const char* config_json,
                                   const char* out_dir) {
  if (auto s = require(scene_dir, "scene_dir")) return s;
  if (auto s = require(out_dir, "out_dir")) return s;
  return guarded([&] {
    segsplat::associate_cmd(scene_dir, config_from(config_json), out_dir);
    return SEGSPLAT_OK;
  });
}

segsplat_status segsplat_train(const char* scene_dir, const char* config_json,
                               const char* out_dir) {
  if (auto s = require(scene_dir, "scene_dir")) return s;
  if (auto s = require(out_dir, "out_dir")) return s;
  return guarded([&] {
    segsplat::train_cmd(scene_dir, config_from(config_json), out_dir);
    return SEGSPLAT_OK;
  });
}

segsplat_status segsplat_eval2d(const char* pred_dir, const char* scene_dir,
                                const char* config_json,
                                const char* report_prefix, double* miou_s,
                                double* miou_m) {
  if (auto s = require(pred_dir, "pred_dir")) return s;
  if (auto s = require(scene_dir, "scene_dir")) return s;
  return guarded([&] {
    segsplat::Eval2dReport report = segsplat::eval2d_cmd(
        pred_dir, scene_dir, config_from(config_json),
        report_prefix ? report_prefix : "");
    if (miou_s) *miou_s = report.miou_s;
    if (miou_m) *miou_m = report.miou_m;
    return SEGSPLAT_OK;
  });
}

segsplat_status segsplat_eval3d(const char* field_path, const char* scene_dir,
                                const char* config_json,
                                const char* report_prefix, double* miou_3d,
                                double* chamfer_distance) {
  if (auto s = require(field_path, "field_path")) return s;
  if (auto s = require(scene_dir, "scene_dir")) return s;
  return guarded([&] {
    segsplat::Eval3dReport report = segsplat::eval3d_cmd(
        field_path, scene_dir, config_from(config_json),
        report_prefix ? report_prefix : "");
    if (miou_3d) *miou_3d = report.miou_3d;
    if (chamfer_distance) *chamfer_distance = report.chamfer_distance;
    return SEGSPLAT_OK;
  });
}

segsplat_status segsplat_field_load(const char* ply_path, segsplat_field** out) {
  if (auto s = require(ply_path, "ply_path")) return s;
  if (auto s = require(out, "out")) return s;
  return guarded([&] {
    auto* handle = new segsplat_field{segsplat::load_field(ply_path)};
    *out = handle;
    return SEGSPLAT_OK;
  });
}

segsplat_status segsplat_field_save(const segsplat_field* field,
                                    const char* ply_path) {
  if (auto s = require(field, "field")) return s;
  if (auto s = require(ply_path, "ply_path")) return s;
  return guarded([&] {
    segsplat::save_field(ply_path, field->rep);
    return SEGSPLAT_OK;
  });
}

void segsplat_field_free(segsplat_field* field) { delete field; }

int64_t segsplat_field_size(const segsplat_field* field) {
  return field ? static_cast<int64_t>(field->rep.size()) : 0;
}

segsplat_status segsplat_field_delete_object(segsplat_field* field,
                                             uint32_t global_id) {
  if (auto s = require(field, "field")) return s;
  return guarded([&]() -> segsplat_status {
    segsplat::EditResult result = segsplat::delete_object(field->rep, global_id);
    field->rep = std::move(result.field);
    if (!result.known_id) {
      g_last_error = "id " + std::to_string(global_id) + " is not in the field";
      return SEGSPLAT_WARN_UNKNOWN_ID;
    }
    return SEGSPLAT_OK;
  });
}

segsplat_status segsplat_field_move_object(segsplat_field* field,
                                           uint32_t global_id,
                                           const double translation[3]) {
  if (auto s = require(field, "field")) return s;
  if (auto s = require(translation, "translation")) return s;
  return guarded([&]() -> segsplat_status {
    segsplat::EditResult result = segsplat::move_object(
        field->rep, global_id,
        segsplat::Vec3(translation[0], translation[1], translation[2]));
    field->rep = std::move(result.field);
    if (!result.known_id) {
      g_last_error = "id " + std::to_string(global_id) + " is not in the field";
      return SEGSPLAT_WARN_UNKNOWN_ID;
    }
    return SEGSPLAT_OK;
  });
}

segsplat_status segsplat_field_render(const segsplat_field* field,
                                      const char* scene_dir, int frame_index,
                                      const char* out_prefix) {
  if (auto s = require(field, "field")) return s;
  if (auto s = require(scene_dir, "scene_dir")) return s;
  if (auto s = require(out_prefix, "out_prefix")) return s;
  return guarded([&] {
    segsplat::render_cmd(field->rep, scene_dir, frame_index, out_prefix);
    return SEGSPLAT_OK;
  });
}

segsplat_status segsplat_field_render_pose(const segsplat_field* field,
                                           const char* pose_json_path,
                                           const char* out_prefix) {
  if (auto s = require(field, "field")) return s;
  if (auto s = require(pose_json_path, "pose_json_path")) return s;
  if (auto s = require(out_prefix, "out_prefix")) return s;
  return guarded([&] {
    segsplat::render_pose_cmd(field->rep, pose_json_path, out_prefix);
    return SEGSPLAT_OK;
  });
}

}  // extern "C"
