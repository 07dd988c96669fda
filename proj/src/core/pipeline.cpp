// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/pipeline.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/losses.hpp"
#include "core/metrics.hpp"
#include "core/renderer.hpp"

namespace segsplat {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    fail(ErrorCode::invalid_input, std::string("malformed JSON in ") + what);
  return j;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot open for writing: " + path);
  out << text;
  if (!out) fail(ErrorCode::io_error, "write failed: " + path);
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok)
      fail(ErrorCode::invalid_input,
           "unknown config key '" + it.key() + "' in " + where);
  }
}

Vec3 parse_vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    fail(ErrorCode::invalid_input, std::string(what) + " must be a 3-array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json camera_to_json(const Camera& cam) {
  json j;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["width"] = cam.width;
  j["height"] = cam.height;
  std::vector<double> rot(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot[r * 3 + c] = cam.rotation(r, c);
  j["rotation"] = rot;
  j["translation"] = {cam.translation.x(), cam.translation.y(),
                      cam.translation.z()};
  return j;
}

Camera camera_from_json(const json& j) {
  Camera cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  const json& rot = j.at("rotation");
  if (!rot.is_array() || rot.size() != 9)
    fail(ErrorCode::invalid_input, "camera rotation must be a 9-array");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cam.rotation(r, c) = rot[r * 3 + c].get<double>();
  cam.translation = parse_vec3(j.at("translation"), "camera translation");
  cam.validate();
  return cam;
}

std::string frame_name(const char* stem, std::size_t index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04zu.%s", stem, index, ext);
  return buf;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  RunConfig config;
  json j = parse_json(json_text, "run config");
  reject_unknown_keys(j, {"association", "training", "eval"}, "run config");

  if (j.contains("association")) {
    const json& a = j["association"];
    reject_unknown_keys(a,
                        {"mode", "reject_above", "min_mask_pixels",
                         "assoc_radius", "pointmap_fusion"},
                        "association");
    if (a.contains("mode")) {
      std::string mode = a["mode"].get<std::string>();
      if (mode == "accumulated")
        config.association.mode = AssociationMode::accumulated;
      else if (mode == "adjacent")
        config.association.mode = AssociationMode::adjacent;
      else if (mode == "independent")
        config.association.mode = AssociationMode::independent;
      else
        fail(ErrorCode::invalid_input, "unknown association mode: " + mode);
    }
    if (a.contains("reject_above"))
      config.association.reject_above = a["reject_above"].get<double>();
    if (a.contains("min_mask_pixels"))
      config.association.min_mask_pixels = a["min_mask_pixels"].get<std::size_t>();
    if (a.contains("assoc_radius"))
      config.association.assoc_radius = a["assoc_radius"].get<double>();
    if (a.contains("pointmap_fusion"))
      config.pointmap_fusion = a["pointmap_fusion"].get<bool>();
  }
  if (!config.pointmap_fusion)
    config.association.mode = AssociationMode::independent;
  if (config.association.reject_above < 0.0 || config.association.reject_above > 1.0)
    fail(ErrorCode::invalid_input, "reject_above must lie in [0,1]");
  if (config.association.assoc_radius <= 0.0)
    fail(ErrorCode::invalid_input, "assoc_radius must be positive");

  if (j.contains("training")) {
    const json& t = j["training"];
    reject_unknown_keys(
        t,
        {"iterations", "lambda_plane", "lambda_2d", "lambda_3d", "lambda_dssim",
         "neighbor_count", "plane_refresh_interval", "densify_interval",
         "densify_start", "densify_stop", "densify_grad_threshold",
         "scale_threshold_rel", "opacity_floor", "split_projection", "seed",
         "voxel_size", "lr_position_rel", "lr_opacity", "lr_scale", "lr_color",
         "lr_identity", "lr_classifier"},
        "training");
    TrainingConfig& tc = config.training;
    if (t.contains("iterations")) tc.iterations = t["iterations"].get<long>();
    if (t.contains("lambda_plane")) tc.lambda_plane = t["lambda_plane"].get<double>();
    if (t.contains("lambda_2d")) tc.lambda_2d = t["lambda_2d"].get<double>();
    if (t.contains("lambda_3d")) tc.lambda_3d = t["lambda_3d"].get<double>();
    if (t.contains("lambda_dssim")) tc.lambda_dssim = t["lambda_dssim"].get<double>();
    if (t.contains("neighbor_count")) tc.neighbor_count = t["neighbor_count"].get<int>();
    if (t.contains("plane_refresh_interval"))
      tc.plane_refresh_interval = t["plane_refresh_interval"].get<long>();
    if (t.contains("densify_interval"))
      tc.densify_interval = t["densify_interval"].get<long>();
    if (t.contains("densify_start")) tc.densify_start = t["densify_start"].get<long>();
    if (t.contains("densify_stop")) tc.densify_stop = t["densify_stop"].get<long>();
    if (t.contains("densify_grad_threshold"))
      tc.densify_grad_threshold = t["densify_grad_threshold"].get<double>();
    if (t.contains("scale_threshold_rel"))
      tc.scale_threshold_rel = t["scale_threshold_rel"].get<double>();
    if (t.contains("opacity_floor")) tc.opacity_floor = t["opacity_floor"].get<double>();
    if (t.contains("split_projection"))
      tc.split_projection = t["split_projection"].get<bool>();
    if (t.contains("seed")) tc.seed = t["seed"].get<std::uint64_t>();
    if (t.contains("voxel_size")) config.voxel_size = t["voxel_size"].get<double>();
    if (t.contains("lr_position_rel")) tc.lr_position_rel = t["lr_position_rel"].get<double>();
    if (t.contains("lr_opacity")) tc.lr_opacity = t["lr_opacity"].get<double>();
    if (t.contains("lr_scale")) tc.lr_scale = t["lr_scale"].get<double>();
    if (t.contains("lr_color")) tc.lr_color = t["lr_color"].get<double>();
    if (t.contains("lr_identity")) tc.lr_identity = t["lr_identity"].get<double>();
    if (t.contains("lr_classifier")) tc.lr_classifier = t["lr_classifier"].get<double>();
    tc.validate();
  }

  if (j.contains("eval")) {
    const json& e = j["eval"];
    reject_unknown_keys(e, {"gamma"}, "eval");
    if (e.contains("gamma")) config.eval_gamma = e["gamma"].get<double>();
    if (config.eval_gamma <= 0.0)
      fail(ErrorCode::invalid_input, "eval gamma must be positive");
  }
  return config;
}

SceneSpec parse_scene_spec(const std::string& json_text) {
  json j = parse_json(json_text, "scene spec");
  reject_unknown_keys(j,
                      {"frame_width", "frame_height", "room_extent", "objects",
                       "trajectory", "noise", "corruption", "gt_cloud_points"},
                      "scene spec");
  SceneSpec spec;
  if (j.contains("frame_width")) spec.frame_width = j["frame_width"].get<int>();
  if (j.contains("frame_height")) spec.frame_height = j["frame_height"].get<int>();
  if (j.contains("room_extent"))
    spec.room_extent = parse_vec3(j["room_extent"], "room_extent");
  if (j.contains("gt_cloud_points"))
    spec.gt_cloud_points = j["gt_cloud_points"].get<std::size_t>();

  if (!j.contains("objects") || !j["objects"].is_array())
    fail(ErrorCode::invalid_input, "scene spec needs an objects array");
  for (const json& o : j["objects"]) {
    reject_unknown_keys(o, {"id", "type", "center", "size", "axis", "color"},
                        "object");
    SceneObject obj;
    obj.id = o.at("id").get<std::uint32_t>();
    std::string type = o.at("type").get<std::string>();
    if (type == "box")
      obj.kind = SceneObject::Kind::box;
    else if (type == "panel")
      obj.kind = SceneObject::Kind::panel;
    else
      fail(ErrorCode::invalid_input, "unknown object type: " + type);
    obj.center = parse_vec3(o.at("center"), "object center");
    obj.size = parse_vec3(o.at("size"), "object size");
    if (o.contains("axis")) {
      std::string axis = o["axis"].get<std::string>();
      if (axis == "x")
        obj.panel_axis = 0;
      else if (axis == "y")
        obj.panel_axis = 1;
      else if (axis == "z")
        obj.panel_axis = 2;
      else
        fail(ErrorCode::invalid_input, "panel axis must be x, y or z");
    }
    if (o.contains("color")) obj.color = parse_vec3(o["color"], "object color");
    spec.objects.push_back(obj);
  }

  if (!j.contains("trajectory"))
    fail(ErrorCode::invalid_input, "scene spec needs a trajectory");
  const json& t = j["trajectory"];
  std::string ttype = t.value("type", "arc");
  if (ttype == "arc") {
    reject_unknown_keys(t,
                        {"type", "frames", "radius", "height", "target",
                         "span_degrees", "fov_degrees"},
                        "trajectory");
    int frames = t.value("frames", 20);
    double radius = t.value("radius", 3.5);
    double height = t.value("height", 1.2);
    Vec3 target = t.contains("target") ? parse_vec3(t["target"], "target")
                                       : Vec3(0, 0, 0);
    double span = t.value("span_degrees", 70.0);
    double fov = t.value("fov_degrees", 60.0);
    spec.trajectory = arc_trajectory(frames, target, radius, height, span, fov,
                                     spec.frame_width, spec.frame_height);
  } else if (ttype == "explicit") {
    reject_unknown_keys(t, {"type", "cameras"}, "trajectory");
    for (const json& c : t.at("cameras"))
      spec.trajectory.push_back(camera_from_json(c));
  } else {
    fail(ErrorCode::invalid_input, "unknown trajectory type: " + ttype);
  }

  if (j.contains("noise")) {
    const json& n = j["noise"];
    reject_unknown_keys(n, {"sigma", "dropout"}, "noise");
    spec.noise_sigma = n.value("sigma", 0.0);
    spec.dropout = n.value("dropout", 0.0);
  }
  if (j.contains("corruption")) {
    const json& c = j["corruption"];
    reject_unknown_keys(c, {"permute_seed", "occlusions"}, "corruption");
    spec.permute_seed = c.value("permute_seed", 1ull);
    if (c.contains("occlusions")) {
      for (const json& o : c["occlusions"]) {
        reject_unknown_keys(o, {"id", "first", "last"}, "occlusion");
        OcclusionInterval occ;
        occ.object_id = o.at("id").get<std::uint32_t>();
        occ.first_frame = o.at("first").get<int>();
        occ.last_frame = o.at("last").get<int>();
        spec.occlusions.push_back(occ);
      }
    }
  }
  spec.validate();
  return spec;
}

void generate_scene_dir(const std::string& spec_json_text, std::uint64_t seed,
                        const std::string& out_dir) {
  SceneSpec spec = parse_scene_spec(spec_json_text);
  SceneBundle bundle = generate(spec, seed);

  fs::create_directories(out_dir);
  json manifest;
  manifest["seed"] = seed;
  manifest["frame_count"] = bundle.frames.size();
  manifest["width"] = spec.frame_width;
  manifest["height"] = spec.frame_height;
  manifest["spec"] = parse_json(spec_json_text, "scene spec");
  manifest["gt_cloud"] = "gt_cloud.ply";
  json frames = json::array();
  for (std::size_t f = 0; f < bundle.frames.size(); ++f) {
    const SceneFrame& frame = bundle.frames[f];
    json entry;
    entry["image"] = frame_name("image", f, "ppm");
    entry["pointmap"] = frame_name("pointmap", f, "pmap");
    entry["gt_mask"] = frame_name("gtmask", f, "pgm");
    entry["raw_mask"] = frame_name("rawmask", f, "pgm");
    entry["camera"] = camera_to_json(frame.camera);
    frames.push_back(entry);
    write_image(out_dir + "/" + entry["image"].get<std::string>(), frame.image);
    write_pointmap(out_dir + "/" + entry["pointmap"].get<std::string>(),
                   frame.pointmap);
    write_mask(out_dir + "/" + entry["gt_mask"].get<std::string>(), frame.gt_mask);
    write_mask(out_dir + "/" + entry["raw_mask"].get<std::string>(),
               frame.corrupted_mask);
  }
  manifest["frames"] = frames;
  write_cloud(out_dir + "/gt_cloud.ply", bundle.gt_cloud);
  write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

SceneDir read_scene_dir(const std::string& scene_dir) {
  std::string manifest_path = scene_dir + "/manifest.json";
  json manifest = parse_json(read_text_file(manifest_path), "manifest");
  SceneDir dir;
  dir.root = scene_dir;
  dir.seed = manifest.value("seed", 0ull);
  dir.spec = parse_scene_spec(manifest.at("spec").dump());
  dir.gt_cloud_path = scene_dir + "/" + manifest.at("gt_cloud").get<std::string>();
  for (const json& entry : manifest.at("frames")) {
    dir.image_paths.push_back(scene_dir + "/" + entry.at("image").get<std::string>());
    dir.pointmap_paths.push_back(scene_dir + "/" +
                                 entry.at("pointmap").get<std::string>());
    dir.gt_mask_paths.push_back(scene_dir + "/" +
                                entry.at("gt_mask").get<std::string>());
    dir.raw_mask_paths.push_back(scene_dir + "/" +
                                 entry.at("raw_mask").get<std::string>());
    dir.cameras.push_back(camera_from_json(entry.at("camera")));
  }
  if (dir.cameras.empty())
    fail(ErrorCode::invalid_input, "scene manifest lists no frames");
  return dir;
}

AssociationResult run_association(const SceneDir& scene, const RunConfig& config) {
  std::vector<std::pair<Pointmap, LabeledMaskSet>> frames;
  frames.reserve(scene.cameras.size());
  for (std::size_t f = 0; f < scene.cameras.size(); ++f)
    frames.emplace_back(read_pointmap(scene.pointmap_paths[f]),
                        read_mask(scene.raw_mask_paths[f]));
  return associate_sequence(frames, config.association);
}

void associate_cmd(const std::string& scene_dir, const RunConfig& config,
                   const std::string& out_dir) {
  SceneDir scene = read_scene_dir(scene_dir);
  AssociationResult result = run_association(scene, config);
  fs::create_directories(out_dir);
  for (std::size_t f = 0; f < result.masks.size(); ++f)
    write_mask(out_dir + "/" + frame_name("mask", f, "pgm"), result.masks[f]);
  write_cloud(out_dir + "/cloud.ply", result.cloud);
}

void save_field(const std::string& ply_path, const GaussianField& field) {
  write_field_splats(ply_path, field);
  json sidecar;
  sidecar["class_count"] = field.classifier.class_count;
  sidecar["class_to_global"] = field.class_to_global;
  sidecar["weights"] = field.classifier.weights;
  sidecar["bias"] = field.classifier.bias;
  write_text_file(ply_path + ".classifier.json", sidecar.dump() + "\n");
}

GaussianField load_field(const std::string& ply_path) {
  GaussianField field = read_field_splats(ply_path);
  std::string sidecar_path = ply_path + ".classifier.json";
  if (!fs::exists(sidecar_path)) return field;

  json sidecar = parse_json(read_text_file(sidecar_path), "classifier sidecar");
  std::vector<std::uint32_t> mapping =
      sidecar.at("class_to_global").get<std::vector<std::uint32_t>>();
  Classifier classifier;
  classifier.class_count = sidecar.at("class_count").get<int>();
  classifier.weights = sidecar.at("weights").get<std::vector<double>>();
  classifier.bias = sidecar.at("bias").get<std::vector<double>>();
  if (mapping.empty() || mapping[0] != 0 ||
      static_cast<int>(mapping.size()) != classifier.class_count ||
      classifier.weights.size() !=
          static_cast<std::size_t>(classifier.class_count) * kIdentityDim ||
      classifier.bias.size() != static_cast<std::size_t>(classifier.class_count))
    fail(ErrorCode::format_error, sidecar_path + ": inconsistent classifier");

  // Remap splat classes from the rebuilt ply mapping onto the sidecar's.
  GaussianField remapped;
  remapped.classifier = std::move(classifier);
  remapped.class_to_global = std::move(mapping);
  remapped.splats = std::move(field.splats);
  for (auto& s : remapped.splats) {
    std::uint32_t global = field.class_to_global[s.class_label];
    int cls = global == 0 ? 0 : remapped.compact_class(global);
    if (cls < 0)
      fail(ErrorCode::format_error,
           sidecar_path + ": splat label missing from classifier mapping");
    s.class_label = static_cast<std::uint32_t>(cls);
  }
  return remapped;
}

void train_cmd(const std::string& scene_dir, const RunConfig& config,
               const std::string& out_dir) {
  SceneDir scene = read_scene_dir(scene_dir);
  AssociationResult assoc = run_association(scene, config);
  if (assoc.cloud.size() == 0)
    fail(ErrorCode::invalid_input, "association produced an empty cloud");

  InitDefaults defaults;
  defaults.voxel_size = config.voxel_size;
  GaussianField field = init_from_cloud(assoc.cloud, defaults);

  std::vector<TrainView> views;
  views.reserve(scene.cameras.size());
  for (std::size_t f = 0; f < scene.cameras.size(); ++f) {
    TrainView view;
    view.image = read_image(scene.image_paths[f]);
    view.mask = assoc.masks[f];
    view.camera = scene.cameras[f];
    views.push_back(std::move(view));
  }

  fs::create_directories(out_dir);
  TrainingConfig tc = config.training;
  tc.diagnostic_dir = out_dir;
  TrainResult result = train(std::move(field), views, tc);

  save_field(out_dir + "/field.ply", result.field);
  write_loss_log(out_dir + "/loss_log.csv", result.log);
}

namespace {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_report(const std::string& prefix,
                  const std::vector<std::pair<std::string, double>>& entries) {
  std::ostringstream text;
  json machine;
  for (const auto& [key, value] : entries) {
    text << key << " " << format_double(value) << "\n";
    if (std::isinf(value))
      machine[key] = format_double(value);
    else
      machine[key] = value;
  }
  write_text_file(prefix + ".txt", text.str());
  write_text_file(prefix + ".json", machine.dump(2) + "\n");
}

}  // namespace

Eval2dReport eval2d_cmd(const std::string& pred_dir, const std::string& scene_dir,
                        const RunConfig& config,
                        const std::string& report_prefix) {
  (void)config;
  SceneDir scene = read_scene_dir(scene_dir);
  std::vector<LabeledMaskSet> preds, gts;
  double miou_s_sum = 0.0;
  for (std::size_t f = 0; f < scene.cameras.size(); ++f) {
    LabeledMaskSet pred =
        read_mask(pred_dir + "/" + frame_name("mask", f, "pgm"));
    LabeledMaskSet gt = read_mask(scene.gt_mask_paths[f]);
    miou_s_sum += miou_single(pred, gt);
    preds.push_back(std::move(pred));
    gts.push_back(std::move(gt));
  }
  Eval2dReport report;
  report.miou_s = miou_s_sum / static_cast<double>(scene.cameras.size());
  report.miou_m = miou_multi(preds, gts);

  // Optional rendered-image quality, when the pred dir carries renders.
  bool have_renders = true;
  for (std::size_t f = 0; f < scene.cameras.size() && have_renders; ++f)
    have_renders = fs::exists(pred_dir + "/" + frame_name("render", f, "ppm"));
  if (have_renders && !scene.cameras.empty()) {
    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (std::size_t f = 0; f < scene.cameras.size(); ++f) {
      Image rendered = read_image(pred_dir + "/" + frame_name("render", f, "ppm"));
      Image reference = read_image(scene.image_paths[f]);
      psnr_sum += psnr(rendered, reference);
      ssim_sum += ssim(rendered, reference);
    }
    report.psnr_mean = psnr_sum / static_cast<double>(scene.cameras.size());
    report.ssim_mean = ssim_sum / static_cast<double>(scene.cameras.size());
  }

  std::vector<std::pair<std::string, double>> entries{
      {"miou_s", report.miou_s}, {"miou_m", report.miou_m}};
  if (report.psnr_mean) entries.emplace_back("psnr", *report.psnr_mean);
  if (report.ssim_mean) entries.emplace_back("ssim", *report.ssim_mean);
  if (!report_prefix.empty()) write_report(report_prefix, entries);
  return report;
}

Eval3dReport eval3d_cmd(const std::string& field_path,
                        const std::string& scene_dir, const RunConfig& config,
                        const std::string& report_prefix) {
  SceneDir scene = read_scene_dir(scene_dir);
  GaussianField field = load_field(field_path);
  SegmentedPointCloud gt_cloud = read_cloud(scene.gt_cloud_path);

  Eval3dReport report;
  report.miou_3d = miou_3d(field, gt_cloud, config.eval_gamma);
  report.chamfer_distance = chamfer(field.positions(), gt_cloud.positions);
  if (!report_prefix.empty())
    write_report(report_prefix, {{"miou_3d", report.miou_3d},
                                 {"chamfer", report.chamfer_distance}});
  return report;
}

namespace {

void render_to_files(const GaussianField& field, const Camera& camera,
                     const std::string& out_prefix) {
  RenderOutput out = render(field, camera);
  write_image(out_prefix + ".ppm", out.color);
  write_mask(out_prefix + "_mask.pgm", argmax_mask(out, field));
}

}  // namespace

void render_cmd(const GaussianField& field, const std::string& scene_dir,
                int frame_index, const std::string& out_prefix) {
  SceneDir scene = read_scene_dir(scene_dir);
  if (frame_index < 0 || frame_index >= static_cast<int>(scene.cameras.size()))
    fail(ErrorCode::invalid_input,
         "frame index " + std::to_string(frame_index) + " out of range");
  render_to_files(field, scene.cameras[frame_index], out_prefix);
}

void render_pose_cmd(const GaussianField& field, const std::string& pose_json_path,
                     const std::string& out_prefix) {
  json pose = parse_json(read_text_file(pose_json_path), "pose file");
  render_to_files(field, camera_from_json(pose), out_prefix);
}

}  // namespace segsplat
