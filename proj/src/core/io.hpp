// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "core/field.hpp"
#include "core/types.hpp"

namespace segsplat {

// Binary file formats. All little-endian except the 16-bit PGM samples,
// which follow the PGM convention (big-endian, most significant byte
// first). Writers then readers round-trip exactly: integers bit-exact,
// floats at f32 precision. Readers raise Error(format_error) with the byte
// offset of the first malformed field.

// "PMAP" | version u16 | width u32 | height u32 | width*height*3 f32
// row-major points | width*height validity bytes (0/1).
void write_pointmap(const std::string& path, const Pointmap& pm);
Pointmap read_pointmap(const std::string& path);

// 16-bit binary PGM, maxval 65535. Id 0 = unlabeled.
void write_mask(const std::string& path, const LabeledMaskSet& mask);
LabeledMaskSet read_mask(const std::string& path);

// Binary little-endian PLY: x,y,z f32, label u16, source_frame u32.
void write_cloud(const std::string& path, const SegmentedPointCloud& cloud);
SegmentedPointCloud read_cloud(const std::string& path);

// Binary little-endian PLY with per-splat properties:
// x,y,z, opacity, scale, r,g,b, identity_0..identity_15 (f32) and label
// (u16, the external global id). Opacity/scale are stored activated and
// clamped into their open ranges when read back. The classifier head is not
// part of this format; the pipeline stores it in a JSON sidecar.
void write_field_splats(const std::string& path, const GaussianField& field);
GaussianField read_field_splats(const std::string& path);

// 8-bit binary PPM (P6). Values are clamped to [0,1] and quantized.
void write_image(const std::string& path, const Image& image);
Image read_image(const std::string& path);

}  // namespace segsplat
