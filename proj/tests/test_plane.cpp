// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "core/plane.hpp"
#include "test_util.hpp"

using namespace segsplat;
using namespace segsplat::testutil;

namespace {

// Closed-form (Cardano) smallest eigenvector of a symmetric 3x3 matrix;
// written from the characteristic polynomial, independent of the library
// eigensolver used by fit_plane.
Vec3 cardano_smallest_direction(const std::vector<Vec3>& pts) {
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;  // xx,yy,zz,xy,xz,yz
  for (const Vec3& p : pts) {
    Vec3 q = p - centroid;
    a += q.x() * q.x();
    b += q.y() * q.y();
    c += q.z() * q.z();
    d += q.x() * q.y();
    e += q.x() * q.z();
    f += q.y() * q.z();
  }
  // eigenvalues of [[a,d,e],[d,b,f],[e,f,c]] via the trigonometric method
  double p1 = d * d + e * e + f * f;
  double q = (a + b + c) / 3.0;
  double p2 = (a - q) * (a - q) + (b - q) * (b - q) + (c - q) * (c - q) + 2 * p1;
  double p = std::sqrt(p2 / 6.0);
  auto detB = [&](double shift) {
    double m00 = a - shift, m11 = b - shift, m22 = c - shift;
    return m00 * (m11 * m22 - f * f) - d * (d * m22 - f * e) +
           e * (d * f - m11 * e);
  };
  double r = detB(q) / (2.0 * p * p * p);
  r = std::clamp(r, -1.0, 1.0);
  double phi = std::acos(r) / 3.0;
  double eig1 = q + 2.0 * p * std::cos(phi);  // largest
  double eig3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  double eig2 = 3.0 * q - eig1 - eig3;
  double lambda = std::min({eig1, eig2, eig3});

  // eigenvector: cross product of two rows of (M - lambda I)
  Vec3 row0(a - lambda, d, e), row1(d, b - lambda, f), row2(e, f, c - lambda);
  Vec3 v = row0.cross(row1);
  if (v.norm() < 1e-12) v = row0.cross(row2);
  if (v.norm() < 1e-12) v = row1.cross(row2);
  return v.normalized();
}

double plane_rms_residual(const std::vector<Vec3>& pts, const Plane& plane) {
  double sum = 0.0;
  for (const Vec3& p : pts) {
    double d = point_plane_distance(p, plane);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(pts.size()));
}

}  // namespace

TEST_CASE("exact planes are recovered") {
  Plane p = fit_plane(std::vector<Vec3>{{0, 0, 2}, {1, 0, 2}, {0, 1, 2}});
  CHECK(p.normal.isApprox(Vec3(0, 0, 1), 1e-12));
  CHECK(p.offset == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(std::abs(p.normal.norm() - 1.0) <= 1e-9);
  CHECK(std::abs(p.normal.dot(p.anchor) + p.offset) <= 1e-9);

  // 10 points on x + y + z = 1
  Pcg32 rng(3);
  std::vector<Vec3> pts;
  for (int i = 0; i < 10; ++i) {
    double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
    pts.emplace_back(x, y, 1.0 - x - y);
  }
  Plane q = fit_plane(pts);
  Vec3 want = Vec3(1, 1, 1) / std::sqrt(3.0);
  CHECK((q.normal - want).norm() <= 1e-9);
  CHECK(plane_rms_residual(pts, q) <= 1e-9);
}

TEST_CASE("noisy plane fit matches the closed-form oracle") {
  Pcg32 rng(17);
  std::vector<Vec3> pts;
  for (int i = 0; i < 50; ++i)
    pts.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1),
                     0.01 * rng.next_gaussian());
  Plane fitted = fit_plane(pts);
  CHECK(plane_rms_residual(pts, fitted) <= 0.02);

  Vec3 oracle = cardano_smallest_direction(pts);
  double align = std::abs(oracle.dot(fitted.normal));
  CHECK(align >= 1.0 - 1e-7);
}

TEST_CASE("random fits agree with the oracle direction") {
  Pcg32 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> pts;
    Vec3 n = random_point(rng).normalized();
    Vec3 u = n.cross(Vec3(0.3, 0.9, -0.1)).normalized();
    Vec3 v = n.cross(u);
    Vec3 base = random_point(rng, -2, 2);
    int count = 5 + static_cast<int>(rng.next_below(40));
    for (int i = 0; i < count; ++i)
      pts.push_back(base + rng.uniform(-1, 1) * u + rng.uniform(-1, 1) * v +
                    0.05 * rng.next_gaussian() * n);
    Plane fitted = fit_plane(pts);
    Vec3 oracle = cardano_smallest_direction(pts);
    CHECK(std::abs(oracle.dot(fitted.normal)) >= 1.0 - 1e-7);
    // sign canonicalization: first nonzero component positive
    for (int i = 0; i < 3; ++i) {
      if (fitted.normal[i] != 0.0) {
        CHECK(fitted.normal[i] > 0.0);
        break;
      }
    }
  }
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(fit_plane(std::vector<Vec3>{{0, 0, 0}, {1, 1, 1}}), Error);
  std::vector<Vec3> collinear;
  for (int i = 0; i < 8; ++i) collinear.emplace_back(i * 0.5, i * 1.0, -i * 0.25);
  CHECK_THROWS_AS(fit_plane(collinear), Error);
  std::vector<Vec3> coincident(5, Vec3(1, 2, 3));
  CHECK_THROWS_AS(fit_plane(coincident), Error);
}

TEST_CASE("fit is locally optimal against random candidate planes") {
  Pcg32 rng(31);
  std::vector<Vec3> pts;
  for (int i = 0; i < 40; ++i)
    pts.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1),
                     0.3 * rng.uniform(-1, 1) + 0.2 * rng.uniform(-1, 1));
  Plane fitted = fit_plane(pts);
  double best = plane_rms_residual(pts, fitted);
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  for (int trial = 0; trial < 1000; ++trial) {
    Plane candidate;
    candidate.normal = random_point(rng).normalized();
    candidate.anchor = centroid;
    candidate.offset = -candidate.normal.dot(centroid);
    CHECK(plane_rms_residual(pts, candidate) >= best - 1e-12);
  }
}

TEST_CASE("point-plane distance") {
  Plane plane;  // z = 0
  plane.normal = Vec3(0, 0, 1);
  plane.anchor = Vec3(0, 0, 0);
  plane.offset = 0;
  CHECK(point_plane_distance(Vec3(3, -2, 0), plane) == 0.0);
  CHECK(point_plane_distance(Vec3(0, 0, 3), plane) == 3.0);

  Pcg32 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    Plane p;
    p.normal = random_point(rng).normalized();
    p.anchor = random_point(rng, -2, 2);
    p.offset = -p.normal.dot(p.anchor);
    Vec3 x = random_point(rng, -3, 3);
    double direct = std::abs(p.normal.x() * x.x() + p.normal.y() * x.y() +
                             p.normal.z() * x.z() + p.offset);
    CHECK(point_plane_distance(x, p) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("split projection lands on the plane and is idempotent") {
  Pcg32 rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    Plane p;
    p.normal = random_point(rng).normalized();
    p.anchor = random_point(rng, -2, 2);
    p.offset = -p.normal.dot(p.anchor);
    Vec3 x = random_point(rng, -5, 5);
    Vec3 projected = split_project(x, p);
    CHECK(point_plane_distance(projected, p) <= 1e-9);
    Vec3 twice = split_project(projected, p);
    CHECK((twice - projected).norm() <= 1e-12);
    // minimal-distance property: no sampled plane point is closer
    Vec3 u = p.normal.cross(Vec3(0.3, 0.77, -0.51)).normalized();
    Vec3 v = p.normal.cross(u);
    double best = (x - projected).norm();
    for (int s = 0; s < 50; ++s) {
      Vec3 other = projected + rng.uniform(-1, 1) * u + rng.uniform(-1, 1) * v;
      CHECK((x - other).norm() >= best - 1e-12);
    }
  }
  Plane z0;
  z0.normal = Vec3(0, 0, 1);
  z0.anchor = Vec3::Zero();
  CHECK(split_project(Vec3(1, 1, 5), z0).isApprox(Vec3(1, 1, 0), 1e-15));
  CHECK(split_project(Vec3(0.4, -0.2, 0), z0) == Vec3(0.4, -0.2, 0));
}

TEST_CASE("same-class neighbors") {
  std::vector<Vec3> pts{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}};
  std::vector<std::uint32_t> labels{1, 1, 1, 1, 1};
  CHECK(same_class_neighbors(pts, labels, 2, 2) == std::vector<int>{1, 3});

  labels = {1, 2, 1, 2, 3};
  CHECK(same_class_neighbors(pts, labels, 4, 3).empty());  // lone class
  CHECK(same_class_neighbors(pts, labels, 2, 5) == std::vector<int>{0});

  Pcg32 rng(51);
  std::vector<Vec3> cloud = random_points(rng, 200);
  std::vector<std::uint32_t> cloud_labels;
  for (int i = 0; i < 200; ++i) cloud_labels.push_back(1 + rng.next_below(4));
  NeighborIndex index(cloud, cloud_labels);
  for (int q = 0; q < 40; ++q) {
    int query = static_cast<int>(rng.next_below(200));
    std::vector<int> got = index.knn_same_class(query, 10);
    // brute-force sorted-distance oracle over the same class
    std::vector<std::pair<double, int>> all;
    for (int i = 0; i < 200; ++i) {
      if (i == query || cloud_labels[i] != cloud_labels[query]) continue;
      all.emplace_back((cloud[i] - cloud[query]).squaredNorm(), i);
    }
    std::sort(all.begin(), all.end());
    std::vector<int> want;
    for (std::size_t i = 0; i < all.size() && i < 10; ++i)
      want.push_back(all[i].second);
    CHECK(got == want);
  }
}

TEST_CASE("plane loss value, gradient, and finite differences") {
  // one point at distance 2, r = 4
  std::vector<Vec3> pts{{0, 0, 2}, {1, 1, 0}, {2, 0, 0}, {0, 5, 0}};
  PlaneSet planes;
  planes.planes.assign(4, std::nullopt);
  Plane z0;
  z0.normal = Vec3(0, 0, 1);
  z0.anchor = Vec3::Zero();
  planes.planes[0] = z0;
  PlaneLossResult r = plane_loss(pts, planes);
  CHECK(r.loss == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.gradient[0].isApprox(Vec3(0, 0, 0.25), 1e-12));
  CHECK(r.gradient[1] == Vec3::Zero());

  // all points on their planes: zero loss and gradient
  std::vector<Vec3> on{{0.3, 0.4, 0}, {1, 2, 0}};
  PlaneSet flat;
  flat.planes.assign(2, z0);
  PlaneLossResult zero = plane_loss(on, flat);
  CHECK(zero.loss == 0.0);
  CHECK(zero.gradient[0] == Vec3::Zero());

  // random configuration vs central differences
  Pcg32 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> positions = random_points(rng, 12, -1, 1);
    PlaneSet set;
    set.planes.assign(positions.size(), std::nullopt);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (rng.next_double() < 0.3) continue;
      Plane p;
      p.normal = random_point(rng).normalized();
      p.anchor = random_point(rng);
      p.offset = -p.normal.dot(p.anchor);
      // keep clear of the non-smooth zero-distance locus
      if (point_plane_distance(positions[i], p) < 1e-3) continue;
      set.planes[i] = p;
    }
    PlaneLossResult res = plane_loss(positions, set);
    for (std::size_t i = 0; i < positions.size(); ++i) {
      if (!set.planes[i]) continue;
      for (int d = 0; d < 3; ++d) {
        double numeric = central_difference(
            [&] { return plane_loss(positions, set).loss; }, positions[i][d]);
        CHECK(rel_error(res.gradient[i][d], numeric) <= 1e-5);
      }
    }
  }
}

TEST_CASE("plane loss is invariant under joint rigid transforms") {
  Pcg32 rng(71);
  std::vector<Vec3> positions = random_points(rng, 30);
  PlaneSet set;
  set.planes.assign(positions.size(), std::nullopt);
  for (std::size_t i = 0; i < positions.size(); i += 2) {
    Plane p;
    p.normal = random_point(rng).normalized();
    p.anchor = random_point(rng);
    p.offset = -p.normal.dot(p.anchor);
    set.planes[i] = p;
  }
  double base = plane_loss(positions, set).loss;

  // random rotation from normalized cross products + translation
  Vec3 axis_a = random_point(rng).normalized();
  Vec3 axis_b = axis_a.cross(random_point(rng)).normalized();
  Mat3 rot;
  rot.col(0) = axis_a;
  rot.col(1) = axis_b;
  rot.col(2) = axis_a.cross(axis_b);
  Vec3 shift = random_point(rng, -4, 4);

  std::vector<Vec3> moved;
  for (const Vec3& p : positions) moved.push_back(rot * p + shift);
  PlaneSet moved_set;
  moved_set.planes.assign(positions.size(), std::nullopt);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!set.planes[i]) continue;
    Plane p;
    p.normal = rot * set.planes[i]->normal;
    p.anchor = rot * set.planes[i]->anchor + shift;
    p.offset = -p.normal.dot(p.anchor);
    moved_set.planes[i] = p;
  }
  CHECK(plane_loss(moved, moved_set).loss == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("fit_planes covers labeled splats with enough neighbors") {
  Pcg32 rng(81);
  std::vector<Vec3> positions;
  std::vector<std::uint32_t> labels;
  for (int i = 0; i < 60; ++i) {
    positions.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1),
                           0.01 * rng.next_gaussian());
    labels.push_back(1);
  }
  positions.emplace_back(5, 5, 5);  // lone class: no plane
  labels.push_back(2);
  positions.emplace_back(0, 0, 0);  // unlabeled: no plane
  labels.push_back(0);

  PlaneSet set = fit_planes(positions, labels, 10, 42);
  CHECK(set.fitted_at == 42);
  for (int i = 0; i < 60; ++i) {
    REQUIRE(set.planes[i].has_value());
    CHECK(std::abs(set.planes[i]->normal.norm() - 1.0) <= 1e-9);
  }
  CHECK_FALSE(set.planes[60].has_value());
  CHECK_FALSE(set.planes[61].has_value());
}
