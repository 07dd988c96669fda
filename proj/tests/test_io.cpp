// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "core/io.hpp"
#include "test_util.hpp"

using namespace segsplat;
using namespace segsplat::testutil;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

Pointmap random_pointmap(Pcg32& rng, int w, int h) {
  Pointmap pm(w, h);
  for (std::size_t i = 0; i < pm.pixel_count(); ++i) {
    pm.points[i] = random_point(rng, -5, 5);
    pm.valid[i] = rng.next_double() < 0.8 ? 1 : 0;
  }
  return pm;
}

}  // namespace

TEST_CASE("pointmap round trip is bit-exact") {
  TempDir dir("io_pmap");
  Pcg32 rng(1);
  Pointmap pm = random_pointmap(rng, 7, 5);
  std::string path = dir.path("a.pmap");
  write_pointmap(path, pm);
  Pointmap back = read_pointmap(path);
  CHECK(back.width == pm.width);
  CHECK(back.height == pm.height);
  for (std::size_t i = 0; i < pm.pixel_count(); ++i) {
    CHECK(back.valid[i] == pm.valid[i]);
    for (int c = 0; c < 3; ++c)
      CHECK(static_cast<float>(back.points[i][c]) ==
            static_cast<float>(pm.points[i][c]));
  }
  // writing the read-back value reproduces the file byte for byte
  std::string again = dir.path("b.pmap");
  write_pointmap(again, back);
  CHECK(slurp(path) == slurp(again));
}

TEST_CASE("mask round trip preserves the 16-bit range") {
  TempDir dir("io_mask");
  LabeledMaskSet mask(4, 3);
  mask.ids = {0, 1, 7, 65535, 0, 2, 2, 2, 9, 0, 65535, 1};
  mask.rebuild_id_list();
  std::string path = dir.path("m.pgm");
  write_mask(path, mask);
  LabeledMaskSet back = read_mask(path);
  CHECK(back.ids == mask.ids);
  CHECK(back.id_list == std::vector<std::uint32_t>{1, 2, 7, 9, 65535});

  mask.ids[0] = 65536;
  CHECK_THROWS_AS(write_mask(dir.path("bad.pgm"), mask), Error);
}

TEST_CASE("cloud and field round trips") {
  TempDir dir("io_cloud");
  Pcg32 rng(2);
  SegmentedPointCloud cloud;
  for (int i = 0; i < 10000; ++i)
    cloud.append(random_point(rng, -3, 3), 1 + rng.next_below(9),
                 rng.next_below(20));
  std::string path = dir.path("c.ply");
  write_cloud(path, cloud);
  SegmentedPointCloud back = read_cloud(path);
  REQUIRE(back.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(back.labels[i] == cloud.labels[i]);
    CHECK(back.source_frame[i] == cloud.source_frame[i]);
    for (int c = 0; c < 3; ++c)
      CHECK(static_cast<float>(back.positions[i][c]) ==
            static_cast<float>(cloud.positions[i][c]));
  }

  GaussianField field;
  field.class_to_global = {0, 3, 8};
  field.classifier.init_zero(3);
  for (int i = 0; i < 50; ++i) {
    GaussianSplat s;
    s.position = random_point(rng);
    s.raw_opacity = rng.uniform(-2, 2);
    s.raw_scale = rng.uniform(-4, -1);
    s.color = Vec3(rng.next_double(), rng.next_double(), rng.next_double());
    for (double& v : s.identity) v = rng.uniform(-1, 1);
    s.class_label = rng.next_below(3);
    field.splats.push_back(s);
  }
  std::string fpath = dir.path("f.ply");
  write_field_splats(fpath, field);
  GaussianField fback = read_field_splats(fpath);
  REQUIRE(fback.size() == field.size());
  // write-read-write is byte-stable
  std::string fpath2 = dir.path("f2.ply");
  write_field_splats(fpath2, fback);
  CHECK(slurp(fpath) == slurp(fpath2));
  for (std::size_t i = 0; i < field.size(); ++i) {
    CHECK(fback.class_to_global[fback.splats[i].class_label] ==
          field.class_to_global[field.splats[i].class_label]);
    CHECK(static_cast<float>(fback.splats[i].opacity()) ==
          static_cast<float>(field.splats[i].opacity()));
    CHECK(static_cast<float>(fback.splats[i].scale()) ==
          static_cast<float>(field.splats[i].scale()));
  }
}

TEST_CASE("image round trip and quantization") {
  TempDir dir("io_img");
  Image img(6, 4, 3);
  Pcg32 rng(3);
  for (double& v : img.data) v = rng.next_double();
  std::string path = dir.path("i.ppm");
  write_image(path, img);
  Image back = read_image(path);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(std::abs(back.data[i] - img.data[i]) <= 0.5 / 255.0 + 1e-12);
  std::string path2 = dir.path("i2.ppm");
  write_image(path2, back);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("every reader rejects a flipped magic byte") {
  TempDir dir("io_magic");
  Pcg32 rng(4);

  Pointmap pm = random_pointmap(rng, 3, 3);
  write_pointmap(dir.path("x.pmap"), pm);
  LabeledMaskSet mask(3, 3);
  mask.ids[4] = 2;
  mask.rebuild_id_list();
  write_mask(dir.path("x.pgm"), mask);
  SegmentedPointCloud cloud;
  cloud.append(Vec3(0, 0, 0), 1, 0);
  write_cloud(dir.path("x.ply"), cloud);
  Image img(3, 3, 3);
  write_image(dir.path("x.ppm"), img);

  for (const char* name : {"x.pmap", "x.pgm", "x.ply", "x.ppm"}) {
    std::string bytes = slurp(dir.path(name));
    for (std::size_t pos = 0; pos < 2; ++pos) {
      std::string flipped = bytes;
      flipped[pos] = static_cast<char>(flipped[pos] ^ 0x40);
      spit(dir.path("bad"), flipped);
      std::string bad = dir.path("bad");
      if (std::string(name) == "x.pmap") CHECK_THROWS_AS(read_pointmap(bad), Error);
      if (std::string(name) == "x.pgm") CHECK_THROWS_AS(read_mask(bad), Error);
      if (std::string(name) == "x.ply") CHECK_THROWS_AS(read_cloud(bad), Error);
      if (std::string(name) == "x.ppm") CHECK_THROWS_AS(read_image(bad), Error);
    }
  }
}

TEST_CASE("truncation reports a byte offset") {
  TempDir dir("io_trunc");
  Pcg32 rng(5);
  Pointmap pm = random_pointmap(rng, 4, 4);
  write_pointmap(dir.path("t.pmap"), pm);
  std::string bytes = slurp(dir.path("t.pmap"));
  spit(dir.path("t.pmap"), bytes.substr(0, bytes.size() / 2));
  try {
    read_pointmap(dir.path("t.pmap"));
    FAIL("expected a format error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::format_error);
    CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
  }
}

TEST_CASE("randomized payload round trips (property)") {
  TempDir dir("io_prop");
  Pcg32 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    int w = 1 + static_cast<int>(rng.next_below(9));
    int h = 1 + static_cast<int>(rng.next_below(9));
    Pointmap pm = random_pointmap(rng, w, h);
    write_pointmap(dir.path("p.pmap"), pm);
    Pointmap back = read_pointmap(dir.path("p.pmap"));
    write_pointmap(dir.path("q.pmap"), back);
    CHECK(slurp(dir.path("p.pmap")) == slurp(dir.path("q.pmap")));

    LabeledMaskSet mask(w, h);
    for (auto& id : mask.ids) id = rng.next_below(70000) % 65536;
    mask.rebuild_id_list();
    write_mask(dir.path("p.pgm"), mask);
    CHECK(read_mask(dir.path("p.pgm")).ids == mask.ids);
  }
}
