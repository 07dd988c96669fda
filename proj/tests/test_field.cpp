// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "core/field.hpp"
#include "test_util.hpp"

using namespace segsplat;
using namespace segsplat::testutil;

namespace {

SegmentedPointCloud random_cloud(Pcg32& rng, std::size_t n,
                                 std::uint32_t max_label = 5) {
  SegmentedPointCloud cloud;
  for (std::size_t i = 0; i < n; ++i)
    cloud.append(random_point(rng), 1 + rng.next_below(max_label),
                 rng.next_below(10));
  return cloud;
}

GaussianField labeled_field(Pcg32& rng, int n, int classes) {
  SegmentedPointCloud cloud;
  for (int i = 0; i < n; ++i)
    cloud.append(random_point(rng), 1 + rng.next_below(classes), 0);
  return init_from_cloud(cloud, InitDefaults{});
}

}  // namespace

TEST_CASE("init keeps labels and builds the class map") {
  SegmentedPointCloud cloud;
  cloud.append(Vec3(0, 0, 0), 1, 0);
  cloud.append(Vec3(1, 0, 0), 1, 0);
  cloud.append(Vec3(0, 1, 0), 2, 1);
  GaussianField field = init_from_cloud(cloud, InitDefaults{});
  REQUIRE(field.size() == 3);
  CHECK(field.class_count() == 3);  // distinct labels + 1
  CHECK(field.class_to_global == std::vector<std::uint32_t>{0, 1, 2});
  CHECK(field.splats[0].class_label == 1);
  CHECK(field.splats[2].class_label == 2);
  for (const auto& s : field.splats) {
    CHECK(s.opacity() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.scale() > 0.0);
    CHECK(std::isfinite(s.identity[0]));
  }
  // same-label splats share the deterministic identity seed
  CHECK(field.splats[0].identity == field.splats[1].identity);
  CHECK(field.splats[0].identity != field.splats[2].identity);

  CHECK_THROWS_AS(init_from_cloud(SegmentedPointCloud{}, InitDefaults{}), Error);
}

TEST_CASE("label-0 cloud points become unlabeled splats") {
  SegmentedPointCloud cloud;
  cloud.positions = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  cloud.labels = {0, 7, 7};
  cloud.source_frame = {0, 0, 1};
  GaussianField field = init_from_cloud(cloud, InitDefaults{});
  REQUIRE(field.size() == 3);
  CHECK(field.class_count() == 2);  // one real class + unlabeled
  CHECK(field.splats[0].class_label == 0);
  CHECK(field.splats[1].class_label == 1);
  // unlabeled splats are exempt from the 3d loss by label
}

TEST_CASE("voxel downsampling matches the unique-cell oracle") {
  Pcg32 rng(91);
  SegmentedPointCloud cloud = random_cloud(rng, 20000);
  InitDefaults defaults;
  defaults.voxel_size = 0.08;
  GaussianField field = init_from_cloud(cloud, defaults);

  std::set<std::tuple<long long, long long, long long>> cells;
  for (const Vec3& p : cloud.positions)
    cells.insert({static_cast<long long>(std::floor(p.x() / defaults.voxel_size)),
                  static_cast<long long>(std::floor(p.y() / defaults.voxel_size)),
                  static_cast<long long>(std::floor(p.z() / defaults.voxel_size))});
  CHECK(field.size() == cells.size());
}

TEST_CASE("densify leaves fields without high gradients unchanged") {
  Pcg32 rng(101);
  GaussianField field = labeled_field(rng, 50, 3);
  std::vector<double> grads(field.size(), 0.0);
  PlaneSet planes;
  DensifyResult r = densify(field, grads, 1e-4, 0.1, planes, 7);
  CHECK(r.field.size() == field.size());
  CHECK(r.clone_count == 0);
  CHECK(r.split_count == 0);
  for (std::size_t i = 0; i < field.size(); ++i)
    CHECK(r.field.splats[i].position == field.splats[i].position);
}

TEST_CASE("split children land exactly on the parent plane") {
  GaussianField field;
  field.class_to_global = {0, 4};
  field.classifier.init_zero(2);
  GaussianSplat big;
  big.position = Vec3(0.2, -0.1, 0.7);
  big.raw_scale = std::log(0.5);  // above the threshold: split
  big.class_label = 1;
  big.identity[3] = 0.25;
  field.splats.push_back(big);

  PlaneSet planes;
  Plane z0;
  z0.normal = Vec3(0, 0, 1);
  z0.anchor = Vec3::Zero();
  planes.planes.push_back(z0);

  std::vector<double> grads{1.0};
  DensifyResult r = densify(field, grads, 1e-4, 0.1, planes, 11);
  REQUIRE(r.field.size() == 2);  // parent removed, 2 children
  CHECK(r.split_count == 1);
  for (const auto& child : r.field.splats) {
    CHECK(child.position.z() == 0.0);
    CHECK(child.class_label == 1);
    CHECK(child.identity[3] == 0.25);
    CHECK(child.scale() == doctest::Approx(0.5 / 1.6).epsilon(1e-12));
  }
  // deterministic under the same seed
  DensifyResult r2 = densify(field, grads, 1e-4, 0.1, planes, 11);
  CHECK(r.field.splats[0].position == r2.field.splats[0].position);
}

TEST_CASE("densify child count matches an independent predicate pass") {
  Pcg32 rng(111);
  GaussianField field = labeled_field(rng, 100, 4);
  std::vector<double> grads(field.size());
  for (double& g : grads) g = rng.next_double() * 4e-4;
  const double grad_threshold = 2e-4;
  const double scale_threshold = 0.12;
  PlaneSet planes;
  DensifyResult r = densify(field, grads, grad_threshold, scale_threshold,
                            planes, 13);

  std::size_t clones = 0, splits = 0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (grads[i] <= grad_threshold) continue;
    if (field.splats[i].scale() <= scale_threshold)
      ++clones;
    else
      ++splits;
  }
  CHECK(r.field.size() == field.size() - splits + clones + 2 * splits);
  CHECK(r.clone_count == static_cast<int>(clones));
  CHECK(r.split_count == static_cast<int>(splits));
}

TEST_CASE("densify never invents labels (property)") {
  Pcg32 rng(121);
  for (int trial = 0; trial < 10; ++trial) {
    GaussianField field = labeled_field(rng, 60, 3);
    std::set<std::uint32_t> before;
    for (const auto& s : field.splats) before.insert(s.class_label);
    std::vector<double> grads(field.size());
    for (double& g : grads) g = rng.next_double() * 5e-4;
    PlaneSet planes = PlaneSet{};
    planes.planes.assign(field.size(), std::nullopt);
    DensifyResult r = densify(field, grads, 2e-4, 0.1, planes,
                              mix_seed(5, trial));
    for (std::size_t i = 0; i < r.field.size(); ++i) {
      CHECK(before.count(r.field.splats[i].class_label) == 1);
      CHECK(r.field.splats[i].class_label ==
            field.splats[r.source_index[i]].class_label);
    }
  }
}

TEST_CASE("prune keeps survivors in order") {
  Pcg32 rng(131);
  GaussianField field = labeled_field(rng, 40, 2);
  for (std::size_t i = 0; i < field.size(); ++i)
    field.splats[i].raw_opacity = logit(i % 3 == 0 ? 0.001 : 0.4);

  PruneResult all = prune(field, 0.0005);
  CHECK(all.field.size() == field.size());

  PruneResult r = prune(field, 0.005);
  std::vector<int> want;
  for (std::size_t i = 0; i < field.size(); ++i)
    if (field.splats[i].opacity() >= 0.005) want.push_back(static_cast<int>(i));
  CHECK(r.kept == want);

  for (auto& s : field.splats) s.raw_opacity = logit(0.001);
  PruneResult empty = prune(field, 0.01);
  CHECK(empty.field.size() == 0);  // caller validates emptiness
}

TEST_CASE("delete and move edits") {
  Pcg32 rng(141);
  GaussianField field = labeled_field(rng, 100, 3);
  std::uint32_t victim_global = field.class_to_global[1];
  std::size_t victims = 0;
  for (const auto& s : field.splats)
    if (s.class_label == 1) ++victims;
  REQUIRE(victims > 0);

  EditResult deleted = delete_object(field, victim_global);
  CHECK(deleted.known_id);
  CHECK(deleted.field.size() == field.size() - victims);
  for (const auto& s : deleted.field.splats) CHECK(s.class_label != 1);

  EditResult unknown = delete_object(field, 999);
  CHECK_FALSE(unknown.known_id);
  CHECK(unknown.field.size() == field.size());

  EditResult still = move_object(field, victim_global, Vec3(0, 0, 0));
  for (std::size_t i = 0; i < field.size(); ++i)
    CHECK(still.field.splats[i].position == field.splats[i].position);

  EditResult there = move_object(field, victim_global, Vec3(1, 0, 0));
  EditResult back = move_object(there.field, victim_global, Vec3(-1, 0, 0));
  for (std::size_t i = 0; i < field.size(); ++i)
    CHECK((back.field.splats[i].position - field.splats[i].position).norm() <=
          1e-12);

  // edit commutation: delete(move(F)) == delete(F) on the targeted class
  EditResult left = delete_object(move_object(field, victim_global, Vec3(2, 3, -1)).field,
                                  victim_global);
  EditResult right = delete_object(field, victim_global);
  REQUIRE(left.field.size() == right.field.size());
  for (std::size_t i = 0; i < left.field.size(); ++i)
    CHECK(left.field.splats[i].position == right.field.splats[i].position);
}
