// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace segsplat {

std::optional<ProjectedSplat> project(const GaussianSplat& splat,
                                      const Camera& camera, int index) {
  Vec3 cam = camera.world_to_camera(splat.position);
  if (!(cam.z() > kNearPlane)) return std::nullopt;
  ProjectedSplat p;
  p.index = index;
  p.depth = cam.z();
  p.u = camera.fx * cam.x() / cam.z() + camera.cx;
  p.v = camera.fy * cam.y() / cam.z() + camera.cy;
  p.sigma2d = 0.5 * (camera.fx + camera.fy) * splat.scale() / cam.z();
  // degenerate states (diverged optimization) must not reach the int casts
  // of the rasterizer
  if (!std::isfinite(p.u) || !std::isfinite(p.v) || !std::isfinite(p.sigma2d))
    return std::nullopt;
  double margin = kFootprintSigmas * p.sigma2d;
  if (p.u + margin < 0 || p.u - margin > camera.width || p.v + margin < 0 ||
      p.v - margin > camera.height)
    return std::nullopt;
  return p;
}

CompositeOutput composite(std::span<const CompositeInput> sorted) {
  CompositeOutput out;
  double transmittance = 1.0;
  for (const CompositeInput& in : sorted) {
    if (transmittance < kTransmittanceFloor) break;
    double a = std::clamp(in.influence, 0.0, kAlphaClamp);
    double w = a * transmittance;
    out.color += w * in.color;
    for (int j = 0; j < kIdentityDim; ++j) out.feature[j] += w * in.feature[j];
    out.alpha += w;
    transmittance *= 1.0 - a;
  }
  return out;
}

CompositeGrads composite_backward(std::span<const CompositeInput> sorted,
                                  const Vec3& d_color_out,
                                  const IdentityVec& d_feature_out,
                                  double d_alpha_out) {
  CompositeOutput total = composite(sorted);
  CompositeGrads grads;
  grads.d_influence.assign(sorted.size(), 0.0);
  grads.d_color.assign(sorted.size(), Vec3::Zero());
  grads.d_feature.assign(sorted.size(), IdentityVec{});

  Vec3 seen_color = Vec3::Zero();
  IdentityVec seen_feature{};
  double seen_alpha = 0.0;
  double transmittance = 1.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (transmittance < kTransmittanceFloor) break;
    double a = std::clamp(sorted[i].influence, 0.0, kAlphaClamp);
    double w = a * transmittance;

    grads.d_color[i] = w * d_color_out;
    for (int j = 0; j < kIdentityDim; ++j)
      grads.d_feature[i][j] = w * d_feature_out[j];

    seen_color += w * sorted[i].color;
    for (int j = 0; j < kIdentityDim; ++j)
      seen_feature[j] += w * sorted[i].feature[j];
    seen_alpha += w;

    // d out / d a: own term with weight T_i, later terms scale by 1/(1-a).
    const double inv_keep = 1.0 / (1.0 - a);
    double d_a = 0.0;
    for (int c = 0; c < 3; ++c) {
      double remaining = total.color[c] - seen_color[c];
      d_a += d_color_out[c] *
             (sorted[i].color[c] * transmittance - remaining * inv_keep);
    }
    for (int j = 0; j < kIdentityDim; ++j) {
      double remaining = total.feature[j] - seen_feature[j];
      d_a += d_feature_out[j] *
             (sorted[i].feature[j] * transmittance - remaining * inv_keep);
    }
    if (d_alpha_out != 0.0) {
      double remaining = total.alpha - seen_alpha;
      d_a += d_alpha_out * (transmittance - remaining * inv_keep);
    }
    // Clamped influences pass no gradient.
    if (sorted[i].influence > 0.0 && sorted[i].influence < kAlphaClamp)
      grads.d_influence[i] = d_a;

    transmittance *= 1.0 - a;
  }
  return grads;
}

namespace {

struct Footprint {
  int x0, x1, y0, y1;  // inclusive pixel bounds, already clamped
  bool empty;
};

Footprint footprint(const ProjectedSplat& p, int width, int height) {
  double margin = kFootprintSigmas * p.sigma2d;
  Footprint f;
  f.x0 = std::max(0, static_cast<int>(std::floor(p.u - margin)));
  f.x1 = std::min(width - 1, static_cast<int>(std::ceil(p.u + margin)));
  f.y0 = std::max(0, static_cast<int>(std::floor(p.v - margin)));
  f.y1 = std::min(height - 1, static_cast<int>(std::ceil(p.v + margin)));
  f.empty = f.x0 > f.x1 || f.y0 > f.y1;
  return f;
}

inline double falloff(const ProjectedSplat& p, double px, double py) {
  double dx = px - p.u;
  double dy = py - p.v;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * p.sigma2d * p.sigma2d));
}

void softmax(const double* logits, double* probs, int k) {
  double m = logits[0];
  for (int i = 1; i < k; ++i) m = std::max(m, logits[i]);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    probs[i] = std::exp(logits[i] - m);
    sum += probs[i];
  }
  for (int i = 0; i < k; ++i) probs[i] /= sum;
}

}  // namespace

RenderOutput render(const GaussianField& field, const Camera& camera,
                    RenderCache* cache) {
  camera.validate();
  if (field.splats.empty())
    fail(ErrorCode::invalid_input, "cannot render an empty field");
  const int width = camera.width;
  const int height = camera.height;
  const int k = field.class_count();

  // Project everything, keep the visible set sorted by (depth, index).
  std::vector<ProjectedSplat> visible;
  visible.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    auto p = project(field.splats[i], camera, static_cast<int>(i));
    if (p) visible.push_back(*p);
  }
  std::stable_sort(visible.begin(), visible.end(),
                   [](const ProjectedSplat& a, const ProjectedSplat& b) {
                     if (a.depth != b.depth) return a.depth < b.depth;
                     return a.index < b.index;
                   });

  // Row lists preserve the global depth order per row.
  std::vector<std::vector<int>> row_splats(height);
  for (std::size_t slot = 0; slot < visible.size(); ++slot) {
    Footprint f = footprint(visible[slot], width, height);
    if (f.empty) continue;
    for (int y = f.y0; y <= f.y1; ++y)
      row_splats[y].push_back(static_cast<int>(slot));
  }

  RenderOutput out;
  out.width = width;
  out.height = height;
  out.color = Image(width, height, 3);
  out.alpha = Image(width, height, 1);
  out.feature.assign(static_cast<std::size_t>(width) * height * kIdentityDim, 0.0);
  out.class_probs = Image(width, height, k);

  parallel_chunks(height, [&](std::int64_t row_begin, std::int64_t row_end) {
    std::vector<double> transmittance(width);
    for (std::int64_t y = row_begin; y < row_end; ++y) {
      std::fill(transmittance.begin(), transmittance.end(), 1.0);
      double py = static_cast<double>(y) + 0.5;
      for (int slot : row_splats[y]) {
        const ProjectedSplat& p = visible[slot];
        const GaussianSplat& s = field.splats[p.index];
        double alpha_splat = s.opacity();
        Footprint f = footprint(p, width, height);
        for (int x = f.x0; x <= f.x1; ++x) {
          double& t = transmittance[x];
          if (t < kTransmittanceFloor) continue;
          double a = std::clamp(alpha_splat * falloff(p, x + 0.5, py), 0.0,
                                kAlphaClamp);
          double w = a * t;
          double* color_px = out.color.at(x, static_cast<int>(y));
          for (int c = 0; c < 3; ++c) color_px[c] += w * s.color[c];
          double* feat_px =
              out.feature.data() +
              (static_cast<std::size_t>(y) * width + x) * kIdentityDim;
          for (int j = 0; j < kIdentityDim; ++j) feat_px[j] += w * s.identity[j];
          *out.alpha.at(x, static_cast<int>(y)) += w;
          t *= 1.0 - a;
        }
      }
      // Class probabilities from the composited feature.
      std::vector<double> logits(k);
      for (int x = 0; x < width; ++x) {
        const double* feat_px =
            out.feature.data() +
            (static_cast<std::size_t>(y) * width + x) * kIdentityDim;
        field.classifier.logits(feat_px, logits.data());
        softmax(logits.data(), out.class_probs.at(x, static_cast<int>(y)), k);
      }
    }
  });

  if (cache) {
    cache->visible = std::move(visible);
    cache->row_splats = std::move(row_splats);
    cache->color_total = out.color;
    cache->feature_total = out.feature;
    cache->alpha_total = out.alpha;
  }
  return out;
}

RenderGrads render_backward(const GaussianField& field, const Camera& camera,
                            const RenderCache& cache, const Image& d_color,
                            const std::vector<double>& d_feature) {
  const int width = camera.width;
  const int height = camera.height;
  const std::size_t n = field.size();
  const bool has_color = !d_color.data.empty();
  const bool has_feature = !d_feature.empty();

  RenderGrads g;
  g.d_position.assign(n, Vec3::Zero());
  g.d_raw_opacity.assign(n, 0.0);
  g.d_raw_scale.assign(n, 0.0);
  g.d_color.assign(n, Vec3::Zero());
  g.d_identity.assign(n, IdentityVec{});
  g.screen_grad_norm.assign(n, 0.0);

  std::vector<double> du(n, 0.0), dv(n, 0.0), dsigma(n, 0.0);

  // Rows are replayed sequentially: per-splat accumulation stays in one
  // fixed order regardless of thread count.
  std::vector<double> transmittance(width);
  std::vector<double> seen_color(static_cast<std::size_t>(width) * 3);
  std::vector<double> seen_feature(static_cast<std::size_t>(width) * kIdentityDim);
  for (int y = 0; y < height; ++y) {
    std::fill(transmittance.begin(), transmittance.end(), 1.0);
    std::fill(seen_color.begin(), seen_color.end(), 0.0);
    std::fill(seen_feature.begin(), seen_feature.end(), 0.0);
    double py = static_cast<double>(y) + 0.5;
    for (int slot : cache.row_splats[y]) {
      const ProjectedSplat& p = cache.visible[slot];
      const GaussianSplat& s = field.splats[p.index];
      double alpha_splat = s.opacity();
      Footprint f = footprint(p, width, height);
      for (int x = f.x0; x <= f.x1; ++x) {
        double& t = transmittance[x];
        if (t < kTransmittanceFloor) continue;
        double px = static_cast<double>(x) + 0.5;
        double fall = falloff(p, px, py);
        double influence = alpha_splat * fall;
        double a = std::clamp(influence, 0.0, kAlphaClamp);
        double w = a * t;
        const double inv_keep = 1.0 / (1.0 - a);

        double d_a = 0.0;
        if (has_color) {
          const double* dC = d_color.at(x, y);
          const double* total = cache.color_total.at(x, y);
          double* seen = seen_color.data() + static_cast<std::size_t>(x) * 3;
          for (int c = 0; c < 3; ++c) {
            g.d_color[p.index][c] += w * dC[c];
            seen[c] += w * s.color[c];
            double remaining = total[c] - seen[c];
            d_a += dC[c] * (s.color[c] * t - remaining * inv_keep);
          }
        }
        if (has_feature) {
          const double* dS = d_feature.data() +
                             (static_cast<std::size_t>(y) * width + x) * kIdentityDim;
          const double* total = cache.feature_total.data() +
                                (static_cast<std::size_t>(y) * width + x) * kIdentityDim;
          double* seen =
              seen_feature.data() + static_cast<std::size_t>(x) * kIdentityDim;
          for (int j = 0; j < kIdentityDim; ++j) {
            g.d_identity[p.index][j] += w * dS[j];
            seen[j] += w * s.identity[j];
            double remaining = total[j] - seen[j];
            d_a += dS[j] * (s.identity[j] * t - remaining * inv_keep);
          }
        }

        if (influence > 0.0 && influence < kAlphaClamp) {
          // chain into opacity and the 2D gaussian falloff
          g.d_raw_opacity[p.index] +=
              d_a * fall * alpha_splat * (1.0 - alpha_splat);
          double d_fall = d_a * alpha_splat;
          double sigma2 = p.sigma2d * p.sigma2d;
          double dx = px - p.u;
          double dy = py - p.v;
          du[p.index] += d_fall * fall * dx / sigma2;
          dv[p.index] += d_fall * fall * dy / sigma2;
          dsigma[p.index] += d_fall * fall * (dx * dx + dy * dy) / (sigma2 * p.sigma2d);
        }
        t *= 1.0 - a;
      }
    }
  }

  // Chain screen-space gradients through the projection, per splat.
  const double f_mean = 0.5 * (camera.fx + camera.fy);
  for (const ProjectedSplat& p : cache.visible) {
    const GaussianSplat& s = field.splats[p.index];
    Vec3 cam = camera.world_to_camera(s.position);
    double z = cam.z();
    Eigen::Matrix<double, 2, 3> jac;
    jac << camera.fx / z, 0.0, -camera.fx * cam.x() / (z * z),
        0.0, camera.fy / z, -camera.fy * cam.y() / (z * z);
    Vec2 d_uv(du[p.index], dv[p.index]);
    g.d_position[p.index] += camera.rotation.transpose() *
                             (jac.transpose() * d_uv);
    // sigma2d = f_mean * scale / depth; position gradients skip this term.
    g.d_raw_scale[p.index] += dsigma[p.index] * f_mean * s.scale() / z;
    Vec2 ndc(d_uv.x() * camera.width / 2.0, d_uv.y() * camera.height / 2.0);
    g.screen_grad_norm[p.index] = ndc.norm();
  }
  return g;
}

LabeledMaskSet argmax_mask(const RenderOutput& out, const GaussianField& field) {
  LabeledMaskSet mask(out.width, out.height);
  const int k = field.class_count();
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      if (*out.alpha.at(x, y) <= 0.0) continue;
      const double* probs = out.class_probs.at(x, y);
      int best = 0;
      for (int c = 1; c < k; ++c)
        if (probs[c] > probs[best]) best = c;
      mask.ids[mask.index(x, y)] = field.class_to_global[best];
    }
  }
  mask.rebuild_id_list();
  return mask;
}

}  // namespace segsplat
