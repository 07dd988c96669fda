// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <unordered_map>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace segsplat {

void SceneSpec::validate() const {
  if (trajectory.empty())
    fail(ErrorCode::invalid_input, "scene spec needs a non-empty trajectory");
  if (noise_sigma < 0.0 || dropout < 0.0 || dropout > 1.0)
    fail(ErrorCode::invalid_input, "scene spec noise parameters out of range");
  std::set<std::uint32_t> ids;
  for (const SceneObject& obj : objects) {
    if (obj.id == 0)
      fail(ErrorCode::invalid_input, "scene object ids must be nonzero");
    if (!ids.insert(obj.id).second)
      fail(ErrorCode::invalid_input, "scene object ids must be distinct");
    if (obj.kind == SceneObject::Kind::panel &&
        (obj.panel_axis < 0 || obj.panel_axis > 2))
      fail(ErrorCode::invalid_input, "panel axis must be 0, 1 or 2");
  }
  for (const Camera& cam : trajectory) cam.validate();
}

Camera make_lookat_camera(const Vec3& eye, const Vec3& target, double fov_deg,
                          int width, int height) {
  Vec3 forward = (target - eye).normalized();
  Vec3 world_up(0, 1, 0);
  if (std::abs(forward.dot(world_up)) > 0.999) world_up = Vec3(1, 0, 0);
  Vec3 right = forward.cross(world_up).normalized();
  Vec3 up = right.cross(forward);  // camera +y looks down in image space

  Camera cam;
  cam.width = width;
  cam.height = height;
  // Rows of the world->camera rotation: camera x right, y down, z forward.
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = (-up).transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -(cam.rotation * eye);
  double f = 0.5 * width / std::tan(0.5 * fov_deg * std::numbers::pi / 180.0);
  cam.fx = cam.fy = f;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  return cam;
}

std::vector<Camera> arc_trajectory(int count, const Vec3& target, double radius,
                                   double height, double span_deg,
                                   double fov_deg, int width, int height_px) {
  std::vector<Camera> cams;
  cams.reserve(count);
  double span = span_deg * std::numbers::pi / 180.0;
  for (int i = 0; i < count; ++i) {
    double s = count == 1 ? 0.5 : static_cast<double>(i) / (count - 1);
    double angle = (s - 0.5) * span;
    Vec3 eye = target + Vec3(radius * std::sin(angle), height,
                             radius * std::cos(angle));
    cams.push_back(make_lookat_camera(eye, target, fov_deg, width, height_px));
  }
  return cams;
}

namespace {

bool inside_box(const SceneObject& obj, const Vec3& p) {
  Vec3 half = obj.size * 0.5;
  return std::abs(p.x() - obj.center.x()) < half.x() &&
         std::abs(p.y() - obj.center.y()) < half.y() &&
         std::abs(p.z() - obj.center.z()) < half.z();
}

// Slab intersection; returns entry t and the axis/sign of the entry face.
bool hit_box(const SceneObject& obj, const Vec3& o, const Vec3& d, double* t_out,
             Vec3* normal_out) {
  Vec3 half = obj.size * 0.5;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = -1;
  for (int a = 0; a < 3; ++a) {
    double lo = obj.center[a] - half[a];
    double hi = obj.center[a] + half[a];
    if (d[a] == 0.0) {
      if (o[a] <= lo || o[a] >= hi) return false;
      continue;
    }
    double t0 = (lo - o[a]) / d[a];
    double t1 = (hi - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      near_axis = a;
    }
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return false;
  }
  if (t_near <= 1e-9 || near_axis < 0) return false;
  *t_out = t_near;
  Vec3 n = Vec3::Zero();
  n[near_axis] = d[near_axis] > 0.0 ? -1.0 : 1.0;
  *normal_out = n;
  return true;
}

bool hit_panel(const SceneObject& obj, const Vec3& o, const Vec3& d,
               double* t_out, Vec3* normal_out) {
  int axis = obj.panel_axis;
  if (d[axis] == 0.0) return false;
  double t = (obj.center[axis] - o[axis]) / d[axis];
  if (t <= 1e-9) return false;
  Vec3 p = o + t * d;
  for (int a = 0; a < 3; ++a) {
    if (a == axis) continue;
    if (std::abs(p[a] - obj.center[a]) > 0.5 * obj.size[a]) return false;
  }
  *t_out = t;
  Vec3 n = Vec3::Zero();
  n[axis] = d[axis] > 0.0 ? -1.0 : 1.0;  // two-sided
  *normal_out = n;
  return true;
}

const Vec3 kLightDir = Vec3(0.4, 0.8, 0.45).normalized();

Vec3 shade(const SceneObject& obj, const Vec3& normal) {
  double lambert = std::abs(normal.dot(kLightDir));
  return obj.color * (0.35 + 0.65 * lambert);
}

}  // namespace

int raycast(const SceneSpec& spec, const Vec3& origin, const Vec3& dir,
            Vec3* hit, Vec3* normal) {
  double best_t = std::numeric_limits<double>::infinity();
  int best = -1;
  Vec3 best_normal = Vec3::Zero();
  for (std::size_t k = 0; k < spec.objects.size(); ++k) {
    const SceneObject& obj = spec.objects[k];
    double t;
    Vec3 n;
    bool ok = obj.kind == SceneObject::Kind::box
                  ? hit_box(obj, origin, dir, &t, &n)
                  : hit_panel(obj, origin, dir, &t, &n);
    if (ok && t < best_t) {
      best_t = t;
      best = static_cast<int>(k);
      best_normal = n;
    }
  }
  if (best >= 0) {
    if (hit) *hit = origin + best_t * dir;
    if (normal) *normal = best_normal;
  }
  return best;
}

SceneBundle generate(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();

  const int n_frames = static_cast<int>(spec.trajectory.size());
  for (int f = 0; f < n_frames; ++f) {
    Vec3 eye = spec.trajectory[f].origin();
    for (const SceneObject& obj : spec.objects)
      if (obj.kind == SceneObject::Kind::box && inside_box(obj, eye))
        fail(ErrorCode::generation_failed,
             "camera of frame " + std::to_string(f) + " is inside object " +
                 std::to_string(obj.id));
  }

  SceneBundle bundle;
  bundle.frames.resize(n_frames);

  parallel_chunks(n_frames, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t f = begin; f < end; ++f) {
      const Camera& cam = spec.trajectory[f];
      SceneFrame& frame = bundle.frames[f];
      frame.camera = cam;
      frame.image = Image(cam.width, cam.height, 3);
      frame.pointmap = Pointmap(cam.width, cam.height);
      frame.gt_mask = LabeledMaskSet(cam.width, cam.height);

      Vec3 eye = cam.origin();
      Mat3 cam_to_world = cam.rotation.transpose();
      for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
          Vec3 dir_cam((x + 0.5 - cam.cx) / cam.fx, (y + 0.5 - cam.cy) / cam.fy,
                       1.0);
          Vec3 dir = cam_to_world * dir_cam;
          Vec3 hit, normal;
          int obj = raycast(spec, eye, dir, &hit, &normal);
          if (obj < 0) continue;
          std::size_t i = frame.pointmap.index(x, y);
          frame.pointmap.points[i] = hit;
          frame.pointmap.valid[i] = 1;
          frame.gt_mask.ids[i] = spec.objects[obj].id;
          Vec3 rgb = shade(spec.objects[obj], normal);
          double* px = frame.image.at(x, y);
          for (int c = 0; c < 3; ++c) px[c] = rgb[c];
        }
      }
      frame.gt_mask.rebuild_id_list();

      // Pointmap noise and dropout, one stream per frame.
      if (spec.noise_sigma > 0.0 || spec.dropout > 0.0) {
        Pcg32 rng(mix_seed(seed, static_cast<std::uint64_t>(f)), 7);
        for (std::size_t i = 0; i < frame.pointmap.pixel_count(); ++i) {
          if (!frame.pointmap.valid[i]) continue;
          if (spec.noise_sigma > 0.0)
            frame.pointmap.points[i] +=
                spec.noise_sigma * Vec3(rng.next_gaussian(), rng.next_gaussian(),
                                        rng.next_gaussian());
          if (spec.dropout > 0.0 && rng.next_double() < spec.dropout)
            frame.pointmap.valid[i] = 0;
        }
      }

      // Corrupted masks: drop occluded objects, then shuffle ids per frame.
      std::set<std::uint32_t> hidden;
      for (const OcclusionInterval& occ : spec.occlusions)
        if (f >= occ.first_frame && f <= occ.last_frame)
          hidden.insert(occ.object_id);

      std::vector<std::uint32_t> visible;
      for (std::uint32_t id : frame.gt_mask.id_list)
        if (!hidden.count(id)) visible.push_back(id);

      Pcg32 shuffle_rng(mix_seed(spec.permute_seed, static_cast<std::uint64_t>(f)),
                        11);
      std::vector<std::uint32_t> order = visible;
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[shuffle_rng.next_below(static_cast<std::uint32_t>(i))]);
      std::unordered_map<std::uint32_t, std::uint32_t> remap;
      for (std::size_t i = 0; i < order.size(); ++i)
        remap[order[i]] = static_cast<std::uint32_t>(i + 1);

      frame.corrupted_mask = LabeledMaskSet(cam.width, cam.height);
      for (std::size_t i = 0; i < frame.gt_mask.pixel_count(); ++i) {
        auto it = remap.find(frame.gt_mask.ids[i]);
        if (it != remap.end()) frame.corrupted_mask.ids[i] = it->second;
      }
      frame.corrupted_mask.rebuild_id_list();
    }
  });

  // Ground-truth cloud: area-proportional surface samples per object.
  double total_area = 0.0;
  std::vector<double> areas(spec.objects.size(), 0.0);
  for (std::size_t k = 0; k < spec.objects.size(); ++k) {
    const SceneObject& obj = spec.objects[k];
    const Vec3& s = obj.size;
    if (obj.kind == SceneObject::Kind::box)
      areas[k] = 2.0 * (s.x() * s.y() + s.y() * s.z() + s.x() * s.z());
    else {
      int a = obj.panel_axis;
      areas[k] = s[(a + 1) % 3] * s[(a + 2) % 3];
    }
    total_area += areas[k];
  }
  for (std::size_t k = 0; k < spec.objects.size() && total_area > 0.0; ++k) {
    const SceneObject& obj = spec.objects[k];
    auto count = static_cast<std::size_t>(
        std::llround(static_cast<double>(spec.gt_cloud_points) * areas[k] /
                     total_area));
    Pcg32 rng(mix_seed(seed ^ 0xc1040dULL, obj.id), 13);
    Vec3 half = obj.size * 0.5;
    for (std::size_t i = 0; i < count; ++i) {
      Vec3 p = obj.center;
      if (obj.kind == SceneObject::Kind::panel) {
        int a = obj.panel_axis;
        p[(a + 1) % 3] += rng.uniform(-half[(a + 1) % 3], half[(a + 1) % 3]);
        p[(a + 2) % 3] += rng.uniform(-half[(a + 2) % 3], half[(a + 2) % 3]);
      } else {
        // face chosen by area, then uniform within it
        double face_areas[3] = {obj.size.y() * obj.size.z(),
                                obj.size.x() * obj.size.z(),
                                obj.size.x() * obj.size.y()};
        double pick = rng.next_double() *
                      (face_areas[0] + face_areas[1] + face_areas[2]);
        int axis = pick < face_areas[0] ? 0 : (pick < face_areas[0] + face_areas[1] ? 1 : 2);
        double side = rng.next_double() < 0.5 ? -1.0 : 1.0;
        p[axis] += side * half[axis];
        p[(axis + 1) % 3] += rng.uniform(-half[(axis + 1) % 3], half[(axis + 1) % 3]);
        p[(axis + 2) % 3] += rng.uniform(-half[(axis + 2) % 3], half[(axis + 2) % 3]);
      }
      bundle.gt_cloud.append(p, obj.id, 0);
    }
  }
  return bundle;
}

SceneSpec reappearance_spec(const SceneSpec& base, std::uint32_t object_id,
                            int first_frame, int last_frame) {
  bool known = false;
  for (const SceneObject& obj : base.objects)
    if (obj.id == object_id) known = true;
  if (!known)
    fail(ErrorCode::invalid_input,
         "unknown object id " + std::to_string(object_id));
  SceneSpec spec = base;
  if (last_frame < first_frame) return spec;  // empty interval: unchanged
  if (first_frame < 0 ||
      last_frame >= static_cast<int>(base.trajectory.size()))
    fail(ErrorCode::invalid_input, "occlusion interval outside the trajectory");
  spec.occlusions.push_back({object_id, first_frame, last_frame});
  return spec;
}

}  // namespace segsplat
