// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "core/synth.hpp"
#include "test_util.hpp"

using namespace segsplat;
using namespace segsplat::testutil;

namespace {

SceneSpec one_box_scene() {
  SceneSpec spec;
  spec.frame_width = 80;
  spec.frame_height = 80;
  // generic, non-round extents keep silhouette edges off pixel centers
  spec.objects.push_back({5, SceneObject::Kind::box, Vec3(0.013, 0.258, -0.041),
                          Vec3(0.917, 0.703, 0.611), 2, Vec3(0.8, 0.5, 0.2)});
  spec.trajectory = {make_lookat_camera(Vec3(0.0, 0.26, 3.1), Vec3(0.013, 0.258, -0.041),
                                        55.0, spec.frame_width, spec.frame_height)};
  return spec;
}

bool equal_bundles(const SceneBundle& a, const SceneBundle& b) {
  if (a.frames.size() != b.frames.size()) return false;
  for (std::size_t f = 0; f < a.frames.size(); ++f) {
    if (a.frames[f].image.data != b.frames[f].image.data) return false;
    if (a.frames[f].pointmap.valid != b.frames[f].pointmap.valid) return false;
    for (std::size_t i = 0; i < a.frames[f].pointmap.points.size(); ++i)
      if (a.frames[f].pointmap.points[i] != b.frames[f].pointmap.points[i])
        return false;
    if (a.frames[f].gt_mask.ids != b.frames[f].gt_mask.ids) return false;
    if (a.frames[f].corrupted_mask.ids != b.frames[f].corrupted_mask.ids)
      return false;
  }
  if (a.gt_cloud.labels != b.gt_cloud.labels) return false;
  for (std::size_t i = 0; i < a.gt_cloud.size(); ++i)
    if (a.gt_cloud.positions[i] != b.gt_cloud.positions[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("same spec and seed give bit-identical bundles") {
  SceneSpec spec = one_box_scene();
  spec.noise_sigma = 0.01;
  spec.dropout = 0.05;
  SceneBundle a = generate(spec, 99);
  SceneBundle b = generate(spec, 99);
  CHECK(equal_bundles(a, b));
  SceneBundle c = generate(spec, 100);
  CHECK_FALSE(equal_bundles(a, c));
}

TEST_CASE("frontal box mask equals the point-in-polygon silhouette") {
  SceneSpec spec = one_box_scene();
  SceneBundle bundle = generate(spec, 1);
  const SceneFrame& frame = bundle.frames[0];
  const Camera& cam = frame.camera;
  const SceneObject& box = spec.objects[0];

  // For a frontal view only the near z face is visible; project its corners
  // and test pixel centers against the convex polygon.
  double z_front = box.center.z() + 0.5 * box.size.z();
  std::vector<Vec3> corners = {
      {box.center.x() - 0.5 * box.size.x(), box.center.y() - 0.5 * box.size.y(), z_front},
      {box.center.x() + 0.5 * box.size.x(), box.center.y() - 0.5 * box.size.y(), z_front},
      {box.center.x() + 0.5 * box.size.x(), box.center.y() + 0.5 * box.size.y(), z_front},
      {box.center.x() - 0.5 * box.size.x(), box.center.y() + 0.5 * box.size.y(), z_front}};
  std::vector<Vec2> poly;
  for (const Vec3& c : corners) {
    Vec3 p = cam.world_to_camera(c);
    poly.emplace_back(cam.fx * p.x() / p.z() + cam.cx,
                      cam.fy * p.y() / p.z() + cam.cy);
  }
  auto inside = [&](double px, double py) {
    // winding-consistent half-plane test for the convex quad
    int sign = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
      double cross = (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
      int s = cross > 0 ? 1 : (cross < 0 ? -1 : 0);
      if (s == 0) continue;
      if (sign == 0) sign = s;
      else if (s != sign) return false;
    }
    return true;
  };

  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      bool in_mask = frame.gt_mask.ids[frame.gt_mask.index(x, y)] == 5;
      CHECK(in_mask == inside(x + 0.5, y + 0.5));
    }
}

TEST_CASE("noiseless pointmap pixels lie exactly on analytic surfaces") {
  SceneSpec spec = one_box_scene();
  spec.objects.push_back({6, SceneObject::Kind::panel, Vec3(0.0, 0.2, -1.0),
                          Vec3(2.5, 1.6, 0.0), 2, Vec3(0.3, 0.3, 0.8)});
  SceneBundle bundle = generate(spec, 4);
  const SceneFrame& frame = bundle.frames[0];
  for (std::size_t i = 0; i < frame.pointmap.pixel_count(); ++i) {
    if (!frame.pointmap.valid[i]) continue;
    const Vec3& p = frame.pointmap.points[i];
    std::uint32_t id = frame.gt_mask.ids[i];
    REQUIRE(id != 0);
    const SceneObject& obj = id == 5 ? spec.objects[0] : spec.objects[1];
    double residual;
    if (obj.kind == SceneObject::Kind::panel) {
      residual = std::abs(p[obj.panel_axis] - obj.center[obj.panel_axis]);
    } else {
      // on a box surface: some axis sits on a face, all within bounds
      residual = std::numeric_limits<double>::infinity();
      for (int a = 0; a < 3; ++a) {
        double lo = std::abs(p[a] - (obj.center[a] - 0.5 * obj.size[a]));
        double hi = std::abs(p[a] - (obj.center[a] + 0.5 * obj.size[a]));
        residual = std::min({residual, lo, hi});
      }
    }
    CHECK(residual <= 1e-9);
  }
}

TEST_CASE("gt cloud labels agree with the analytic surfaces") {
  SceneSpec spec = one_box_scene();
  spec.objects.push_back({6, SceneObject::Kind::panel, Vec3(0.0, 0.2, -1.0),
                          Vec3(2.5, 1.6, 0.0), 2, Vec3(0.3, 0.3, 0.8)});
  spec.gt_cloud_points = 4000;
  SceneBundle bundle = generate(spec, 2);
  REQUIRE(bundle.gt_cloud.size() > 0);
  for (std::size_t i = 0; i < bundle.gt_cloud.size(); ++i) {
    const Vec3& p = bundle.gt_cloud.positions[i];
    const SceneObject& obj =
        bundle.gt_cloud.labels[i] == 5 ? spec.objects[0] : spec.objects[1];
    if (obj.kind == SceneObject::Kind::panel) {
      CHECK(std::abs(p[obj.panel_axis] - obj.center[obj.panel_axis]) <= 1e-12);
    } else {
      double residual = std::numeric_limits<double>::infinity();
      for (int a = 0; a < 3; ++a) {
        double lo = std::abs(p[a] - (obj.center[a] - 0.5 * obj.size[a]));
        double hi = std::abs(p[a] - (obj.center[a] + 0.5 * obj.size[a]));
        residual = std::min({residual, lo, hi});
      }
      CHECK(residual <= 1e-12);
    }
  }
}

TEST_CASE("corrupted masks are a per-frame relabeling of gt outside occlusions") {
  SceneSpec spec = one_box_scene();
  spec.objects.push_back({6, SceneObject::Kind::panel, Vec3(0.0, 0.2, -1.0),
                          Vec3(2.5, 1.6, 0.0), 2, Vec3(0.3, 0.3, 0.8)});
  spec.trajectory = arc_trajectory(6, Vec3(0, 0.25, 0), 3.0, 1.0, 50.0, 55.0,
                                   spec.frame_width, spec.frame_height);
  spec.permute_seed = 9;
  SceneBundle bundle = generate(spec, 11);
  for (const SceneFrame& frame : bundle.frames) {
    std::map<std::uint32_t, std::uint32_t> gt_to_raw;
    for (std::size_t i = 0; i < frame.gt_mask.pixel_count(); ++i) {
      std::uint32_t g = frame.gt_mask.ids[i];
      std::uint32_t r = frame.corrupted_mask.ids[i];
      CHECK((g == 0) == (r == 0));
      if (g == 0) continue;
      auto it = gt_to_raw.find(g);
      if (it == gt_to_raw.end())
        gt_to_raw[g] = r;
      else
        CHECK(it->second == r);
    }
    std::set<std::uint32_t> raw_side;
    for (auto& [g, r] : gt_to_raw) CHECK(raw_side.insert(r).second);
  }
}

TEST_CASE("occlusion intervals erase the object from corrupted masks only") {
  SceneSpec spec = one_box_scene();
  spec.trajectory = arc_trajectory(20, Vec3(0, 0.25, 0), 3.0, 1.0, 50.0, 55.0,
                                   spec.frame_width, spec.frame_height);
  SceneSpec hidden = reappearance_spec(spec, 5, 8, 13);
  SceneBundle bundle = generate(hidden, 21);
  for (int f = 0; f < 20; ++f) {
    const SceneFrame& frame = bundle.frames[f];
    bool gt_present = false, raw_present = false;
    for (std::size_t i = 0; i < frame.gt_mask.pixel_count(); ++i) {
      if (frame.gt_mask.ids[i] == 5) gt_present = true;
      if (frame.corrupted_mask.ids[i] != 0 && frame.gt_mask.ids[i] == 5)
        raw_present = true;
    }
    CHECK(gt_present);  // the box is visible from every arc pose
    CHECK(raw_present == !(f >= 8 && f <= 13));
  }
}

TEST_CASE("reappearance spec edge cases") {
  SceneSpec spec = one_box_scene();
  CHECK_THROWS_AS(reappearance_spec(spec, 99, 0, 0), Error);
  SceneSpec unchanged = reappearance_spec(spec, 5, 3, 2);  // empty interval
  CHECK(unchanged.occlusions.empty());
  CHECK_THROWS_AS(reappearance_spec(spec, 5, 0, 50), Error);
}

TEST_CASE("camera inside an object names the frame") {
  SceneSpec spec = one_box_scene();
  spec.trajectory.push_back(make_lookat_camera(Vec3(0.013, 0.258, -0.041),
                                               Vec3(1, 0.3, 0), 55.0,
                                               spec.frame_width, spec.frame_height));
  try {
    generate(spec, 1);
    FAIL("expected a generation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::generation_failed);
    CHECK(std::string(e.what()).find("frame 1") != std::string::npos);
  }
}

TEST_CASE("dropout invalidates roughly the requested fraction") {
  SceneSpec spec = one_box_scene();
  spec.dropout = 0.3;
  SceneBundle noisy = generate(spec, 8);
  SceneBundle clean = [&] {
    SceneSpec s = spec;
    s.dropout = 0.0;
    return generate(s, 8);
  }();
  std::size_t before = 0, after = 0;
  for (std::size_t i = 0; i < clean.frames[0].pointmap.pixel_count(); ++i) {
    before += clean.frames[0].pointmap.valid[i];
    after += noisy.frames[0].pointmap.valid[i];
  }
  REQUIRE(before > 300);
  double kept = static_cast<double>(after) / static_cast<double>(before);
  CHECK(kept > 0.6);
  CHECK(kept < 0.8);
}
