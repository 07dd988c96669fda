// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "core/error.hpp"

namespace segsplat {

namespace {

class Writer {
 public:
  explicit Writer(const std::string& path)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) fail(ErrorCode::io_error, "cannot open for writing: " + path);
  }
  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u16le(std::uint16_t v) {
    std::uint8_t b[2] = {static_cast<std::uint8_t>(v & 0xff),
                         static_cast<std::uint8_t>(v >> 8)};
    bytes(b, 2);
  }
  void u16be(std::uint16_t v) {
    std::uint8_t b[2] = {static_cast<std::uint8_t>(v >> 8),
                         static_cast<std::uint8_t>(v & 0xff)};
    bytes(b, 2);
  }
  void u32le(std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    bytes(b, 4);
  }
  void f32le(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32le(bits);
  }
  void text(const std::string& s) { bytes(s.data(), s.size()); }
  void close() {
    out_.close();
    if (!out_) fail(ErrorCode::io_error, "write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) fail(ErrorCode::io_error, "cannot open for reading: " + path);
  }
  std::size_t offset() const { return offset_; }
  void bytes(void* data, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      fail(ErrorCode::format_error, path_ + ": truncated " + what +
                                        " at byte offset " + std::to_string(offset_));
    offset_ += n;
  }
  std::uint8_t u8(const char* what) {
    std::uint8_t v;
    bytes(&v, 1, what);
    return v;
  }
  std::uint16_t u16le(const char* what) {
    std::uint8_t b[2];
    bytes(b, 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint16_t u16be(const char* what) {
    std::uint8_t b[2];
    bytes(b, 2, what);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
  }
  std::uint32_t u32le(const char* what) {
    std::uint8_t b[4];
    bytes(b, 4, what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  }
  float f32le(const char* what) {
    std::uint32_t bits = u32le(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  // Reads one whitespace-delimited ASCII token, skipping '#' comments.
  std::string token(const char* what) {
    std::string tok;
    for (;;) {
      int c = in_.get();
      if (c == EOF)
        fail(ErrorCode::format_error, path_ + ": truncated " + what +
                                          " at byte offset " + std::to_string(offset_));
      ++offset_;
      if (c == '#') {
        while (c != EOF && c != '\n') {
          c = in_.get();
          if (c != EOF) ++offset_;
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
  }
  std::string line(const char* what) {
    std::string s;
    for (;;) {
      int c = in_.get();
      if (c == EOF)
        fail(ErrorCode::format_error, path_ + ": truncated " + what +
                                          " at byte offset " + std::to_string(offset_));
      ++offset_;
      if (c == '\n') return s;
      s.push_back(static_cast<char>(c));
    }
  }
  void expect_magic(const std::string& magic, const char* format) {
    std::string got(magic.size(), '\0');
    bytes(got.data(), got.size(), "magic");
    if (got != magic)
      fail(ErrorCode::format_error,
           path_ + ": bad magic for " + format + " at byte offset 0");
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t offset_ = 0;
};

int parse_int(Reader& r, const std::string& tok, const char* what) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::format_error, r.path() + ": bad " + std::string(what) +
                                      " near byte offset " + std::to_string(r.offset()));
  }
}

constexpr std::uint16_t kPointmapVersion = 1;

}  // namespace

void write_pointmap(const std::string& path, const Pointmap& pm) {
  pm.validate();
  Writer w(path);
  w.text("PMAP");
  w.u16le(kPointmapVersion);
  w.u32le(static_cast<std::uint32_t>(pm.width));
  w.u32le(static_cast<std::uint32_t>(pm.height));
  for (const Vec3& p : pm.points) {
    w.f32le(static_cast<float>(p.x()));
    w.f32le(static_cast<float>(p.y()));
    w.f32le(static_cast<float>(p.z()));
  }
  for (std::uint8_t v : pm.valid) w.u8(v ? 1 : 0);
  w.close();
}

Pointmap read_pointmap(const std::string& path) {
  Reader r(path);
  r.expect_magic("PMAP", "pointmap");
  std::uint16_t version = r.u16le("version");
  if (version != kPointmapVersion)
    fail(ErrorCode::format_error,
         path + ": unsupported pointmap version " + std::to_string(version));
  std::uint32_t width = r.u32le("width");
  std::uint32_t height = r.u32le("height");
  if (width == 0 || height == 0 || width > (1u << 20) || height > (1u << 20))
    fail(ErrorCode::format_error, path + ": implausible pointmap dimensions");
  Pointmap pm(static_cast<int>(width), static_cast<int>(height));
  for (Vec3& p : pm.points) {
    p.x() = r.f32le("point");
    p.y() = r.f32le("point");
    p.z() = r.f32le("point");
  }
  for (std::uint8_t& v : pm.valid) v = r.u8("validity");
  return pm;
}

void write_mask(const std::string& path, const LabeledMaskSet& mask) {
  for (std::uint32_t id : mask.ids)
    if (id > 65535)
      fail(ErrorCode::invalid_input, "mask id exceeds the 16-bit PGM range");
  Writer w(path);
  std::ostringstream header;
  header << "P5\n" << mask.width << " " << mask.height << "\n65535\n";
  w.text(header.str());
  for (std::uint32_t id : mask.ids) w.u16be(static_cast<std::uint16_t>(id));
  w.close();
}

LabeledMaskSet read_mask(const std::string& path) {
  Reader r(path);
  std::string magic = r.token("magic");
  if (magic != "P5")
    fail(ErrorCode::format_error, path + ": bad magic for mask at byte offset 0");
  int width = parse_int(r, r.token("width"), "width");
  int height = parse_int(r, r.token("height"), "height");
  int maxval = parse_int(r, r.token("maxval"), "maxval");
  if (width <= 0 || height <= 0)
    fail(ErrorCode::format_error, path + ": bad mask dimensions");
  if (maxval != 65535)
    fail(ErrorCode::format_error, path + ": mask maxval must be 65535");
  LabeledMaskSet mask(width, height);
  for (std::uint32_t& id : mask.ids) id = r.u16be("sample");
  mask.rebuild_id_list();
  return mask;
}

namespace {

void write_ply_header(Writer& w, std::size_t count,
                      const std::vector<std::string>& properties) {
  w.text("ply\n");
  w.text("format binary_little_endian 1.0\n");
  w.text("element vertex " + std::to_string(count) + "\n");
  for (const std::string& p : properties) w.text("property " + p + "\n");
  w.text("end_header\n");
}

std::size_t read_ply_header(Reader& r, const std::string& path,
                            const std::vector<std::string>& properties) {
  std::string magic(3, '\0');
  r.bytes(magic.data(), 3, "magic");
  std::string nl = r.line("magic");
  if (magic != "ply" || !nl.empty())
    fail(ErrorCode::format_error, path + ": bad magic for ply at byte offset 0");
  if (r.line("format") != "format binary_little_endian 1.0")
    fail(ErrorCode::format_error, path + ": unsupported ply format");
  std::string element = r.line("element");
  const std::string prefix = "element vertex ";
  if (element.rfind(prefix, 0) != 0)
    fail(ErrorCode::format_error, path + ": expected vertex element");
  std::size_t count = 0;
  try {
    count = std::stoull(element.substr(prefix.size()));
  } catch (const std::exception&) {
    fail(ErrorCode::format_error, path + ": bad vertex count");
  }
  for (const std::string& p : properties) {
    if (r.line("property") != "property " + p)
      fail(ErrorCode::format_error, path + ": unexpected ply property (wanted '" +
                                        p + "') near byte offset " +
                                        std::to_string(r.offset()));
  }
  if (r.line("end_header") != "end_header")
    fail(ErrorCode::format_error, path + ": missing end_header");
  return count;
}

const std::vector<std::string> kCloudProps = {
    "float x", "float y", "float z", "ushort label", "uint source_frame"};

const std::vector<std::string> kFieldProps = {
    "float x", "float y", "float z", "float opacity", "float scale",
    "float r", "float g", "float b",
    "float identity_0", "float identity_1", "float identity_2",
    "float identity_3", "float identity_4", "float identity_5",
    "float identity_6", "float identity_7", "float identity_8",
    "float identity_9", "float identity_10", "float identity_11",
    "float identity_12", "float identity_13", "float identity_14",
    "float identity_15", "ushort label"};

}  // namespace

void write_cloud(const std::string& path, const SegmentedPointCloud& cloud) {
  cloud.validate();
  for (std::uint32_t label : cloud.labels)
    if (label > 65535)
      fail(ErrorCode::invalid_input, "cloud label exceeds the 16-bit range");
  Writer w(path);
  write_ply_header(w, cloud.size(), kCloudProps);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    w.f32le(static_cast<float>(cloud.positions[i].x()));
    w.f32le(static_cast<float>(cloud.positions[i].y()));
    w.f32le(static_cast<float>(cloud.positions[i].z()));
    w.u16le(static_cast<std::uint16_t>(cloud.labels[i]));
    w.u32le(cloud.source_frame[i]);
  }
  w.close();
}

SegmentedPointCloud read_cloud(const std::string& path) {
  Reader r(path);
  std::size_t count = read_ply_header(r, path, kCloudProps);
  SegmentedPointCloud cloud;
  cloud.positions.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec3 p;
    p.x() = r.f32le("x");
    p.y() = r.f32le("y");
    p.z() = r.f32le("z");
    std::uint16_t label = r.u16le("label");
    std::uint32_t frame = r.u32le("source_frame");
    cloud.append(p, label, frame);
  }
  return cloud;
}

void write_field_splats(const std::string& path, const GaussianField& field) {
  for (const auto& s : field.splats)
    if (s.class_label >= field.class_to_global.size())
      fail(ErrorCode::invalid_input, "splat class out of range");
  Writer w(path);
  write_ply_header(w, field.size(), kFieldProps);
  for (const auto& s : field.splats) {
    w.f32le(static_cast<float>(s.position.x()));
    w.f32le(static_cast<float>(s.position.y()));
    w.f32le(static_cast<float>(s.position.z()));
    w.f32le(static_cast<float>(s.opacity()));
    w.f32le(static_cast<float>(s.scale()));
    w.f32le(static_cast<float>(s.color.x()));
    w.f32le(static_cast<float>(s.color.y()));
    w.f32le(static_cast<float>(s.color.z()));
    for (double v : s.identity) w.f32le(static_cast<float>(v));
    std::uint32_t global = field.class_to_global[s.class_label];
    if (global > 65535)
      fail(ErrorCode::invalid_input, "global id exceeds the 16-bit range");
    w.u16le(static_cast<std::uint16_t>(global));
  }
  w.close();
}

GaussianField read_field_splats(const std::string& path) {
  Reader r(path);
  std::size_t count = read_ply_header(r, path, kFieldProps);
  std::vector<GaussianSplat> splats;
  std::vector<std::uint32_t> globals;
  splats.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    GaussianSplat s;
    s.position.x() = r.f32le("x");
    s.position.y() = r.f32le("y");
    s.position.z() = r.f32le("z");
    double opacity = std::clamp<double>(r.f32le("opacity"), 1e-7, 1.0 - 1e-7);
    s.raw_opacity = logit(opacity);
    double scale = std::max<double>(r.f32le("scale"), 1e-30);
    s.raw_scale = std::log(scale);
    s.color.x() = r.f32le("r");
    s.color.y() = r.f32le("g");
    s.color.z() = r.f32le("b");
    for (double& v : s.identity) v = r.f32le("identity");
    splats.push_back(s);
    globals.push_back(r.u16le("label"));
  }
  GaussianField field;
  std::set<std::uint32_t> present(globals.begin(), globals.end());
  present.erase(0);
  field.class_to_global.assign(1, 0);
  for (std::uint32_t g : present) field.class_to_global.push_back(g);
  field.classifier.init_zero(static_cast<int>(field.class_to_global.size()));
  for (std::size_t i = 0; i < splats.size(); ++i) {
    int cls = globals[i] == 0 ? 0 : field.compact_class(globals[i]);
    splats[i].class_label = static_cast<std::uint32_t>(cls);
  }
  field.splats = std::move(splats);
  return field;
}

void write_image(const std::string& path, const Image& image) {
  if (image.channels != 3)
    fail(ErrorCode::invalid_input, "ppm writer expects a 3-channel image");
  Writer w(path);
  std::ostringstream header;
  header << "P6\n" << image.width << " " << image.height << "\n255\n";
  w.text(header.str());
  for (double v : image.data) {
    double q = std::clamp(v, 0.0, 1.0) * 255.0;
    w.u8(static_cast<std::uint8_t>(std::lround(q)));
  }
  w.close();
}

Image read_image(const std::string& path) {
  Reader r(path);
  std::string magic = r.token("magic");
  if (magic != "P6")
    fail(ErrorCode::format_error, path + ": bad magic for image at byte offset 0");
  int width = parse_int(r, r.token("width"), "width");
  int height = parse_int(r, r.token("height"), "height");
  int maxval = parse_int(r, r.token("maxval"), "maxval");
  if (width <= 0 || height <= 0)
    fail(ErrorCode::format_error, path + ": bad image dimensions");
  if (maxval != 255)
    fail(ErrorCode::format_error, path + ": image maxval must be 255");
  Image image(width, height, 3);
  for (double& v : image.data) v = r.u8("sample") / 255.0;
  return image;
}

}  // namespace segsplat
