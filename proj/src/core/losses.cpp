// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#include "core/losses.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace segsplat {

namespace {

constexpr int kWindow = 11;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

const std::vector<double>& ssim_kernel_1d() {
  static const std::vector<double> k = [] {
    std::vector<double> v(kWindow);
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
      double d = i - (kWindow - 1) / 2.0;
      v[i] = std::exp(-d * d / (2.0 * sigma * sigma));
      sum += v[i];
    }
    for (double& x : v) x /= sum;
    return v;
  }();
  return k;
}

// Valid separable correlation of one channel plane; output (h-10)x(w-10).
std::vector<double> correlate_valid(const std::vector<double>& plane, int w,
                                    int h) {
  const auto& k = ssim_kernel_1d();
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;
  std::vector<double> horiz(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i)
        s += k[i] * plane[static_cast<std::size_t>(y) * w + x + i];
      horiz[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i)
        s += k[i] * horiz[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

// Adjoint of correlate_valid: spreads map gradients back over windows.
std::vector<double> spread_full(const std::vector<double>& map, int ow, int oh,
                                int w, int h) {
  const auto& k = ssim_kernel_1d();
  std::vector<double> vert(static_cast<std::size_t>(ow) * h, 0.0);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double g = map[static_cast<std::size_t>(y) * ow + x];
      for (int i = 0; i < kWindow; ++i)
        vert[static_cast<std::size_t>(y + i) * ow + x] += k[i] * g;
    }
  std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double g = vert[static_cast<std::size_t>(y) * ow + x];
      for (int i = 0; i < kWindow; ++i)
        out[static_cast<std::size_t>(y) * w + x + i] += k[i] * g;
    }
  return out;
}

std::vector<double> channel_plane(const Image& img, int c) {
  std::vector<double> plane(img.pixel_count());
  for (std::size_t i = 0; i < plane.size(); ++i)
    plane[i] = img.data[i * img.channels + c];
  return plane;
}

// Per-channel SSIM mean; optionally accumulates dSSIM/dx into d_plane.
double ssim_channel(const std::vector<double>& x, const std::vector<double>& y,
                    int w, int h, std::vector<double>* d_plane) {
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;
  const std::size_t map_size = static_cast<std::size_t>(ow) * oh;

  std::vector<double> xx(x.size()), yy(y.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  std::vector<double> mu_x = correlate_valid(x, w, h);
  std::vector<double> mu_y = correlate_valid(y, w, h);
  std::vector<double> m_xx = correlate_valid(xx, w, h);
  std::vector<double> m_yy = correlate_valid(yy, w, h);
  std::vector<double> m_xy = correlate_valid(xy, w, h);

  double total = 0.0;
  std::vector<double> g_mu, g_xx, g_xy;
  if (d_plane) {
    g_mu.assign(map_size, 0.0);
    g_xx.assign(map_size, 0.0);
    g_xy.assign(map_size, 0.0);
  }
  for (std::size_t i = 0; i < map_size; ++i) {
    double sx2 = m_xx[i] - mu_x[i] * mu_x[i];
    double sy2 = m_yy[i] - mu_y[i] * mu_y[i];
    double sxy = m_xy[i] - mu_x[i] * mu_y[i];
    double a1 = 2.0 * mu_x[i] * mu_y[i] + kSsimC1;
    double a2 = 2.0 * sxy + kSsimC2;
    double b1 = mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + kSsimC1;
    double b2 = sx2 + sy2 + kSsimC2;
    double s = (a1 * a2) / (b1 * b2);
    total += s;
    if (d_plane) {
      double d_a1 = a2 / (b1 * b2);
      double d_a2 = a1 / (b1 * b2);
      double d_b1 = -s / b1;
      double d_b2 = -s / b2;
      // sx2 and sxy fold their -mu terms into the mu gradient.
      g_mu[i] = d_a1 * 2.0 * mu_y[i] + d_b1 * 2.0 * mu_x[i] +
                d_a2 * 2.0 * (-mu_y[i]) + d_b2 * (-2.0 * mu_x[i]);
      g_xx[i] = d_b2;
      g_xy[i] = d_a2 * 2.0;
    }
  }
  double mean = total / static_cast<double>(map_size);
  if (d_plane) {
    double inv = 1.0 / static_cast<double>(map_size);
    for (std::size_t i = 0; i < map_size; ++i) {
      g_mu[i] *= inv;
      g_xx[i] *= inv;
      g_xy[i] *= inv;
    }
    std::vector<double> s_mu = spread_full(g_mu, ow, oh, w, h);
    std::vector<double> s_xx = spread_full(g_xx, ow, oh, w, h);
    std::vector<double> s_xy = spread_full(g_xy, ow, oh, w, h);
    d_plane->assign(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
      (*d_plane)[i] = s_mu[i] + s_xx[i] * 2.0 * x[i] + s_xy[i] * y[i];
  }
  return mean;
}

void check_pair(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    fail(ErrorCode::invalid_input, "image dimensions do not match");
  if (a.width <= 0 || a.height <= 0)
    fail(ErrorCode::invalid_input, "images are empty");
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  check_pair(a, b);
  if (a.width < kWindow || a.height < kWindow)
    fail(ErrorCode::invalid_input, "ssim needs images at least 11x11");
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c)
    total += ssim_channel(channel_plane(a, c), channel_plane(b, c), a.width,
                          a.height, nullptr);
  return total / a.channels;
}

ImageLossResult loss_img(const Image& rendered, const Image& target,
                         double lambda_dssim) {
  check_pair(rendered, target);
  ImageLossResult result;
  result.d_image = Image(rendered.width, rendered.height, rendered.channels);

  const double n = static_cast<double>(rendered.data.size());
  double l1 = 0.0;
  for (std::size_t i = 0; i < rendered.data.size(); ++i) {
    double delta = rendered.data[i] - target.data[i];
    l1 += std::abs(delta);
    double sign = delta > 0.0 ? 1.0 : (delta < 0.0 ? -1.0 : 0.0);
    result.d_image.data[i] = (1.0 - lambda_dssim) * sign / n;
  }
  l1 /= n;
  result.loss = (1.0 - lambda_dssim) * l1;

  if (lambda_dssim > 0.0) {
    if (rendered.width < kWindow || rendered.height < kWindow)
      fail(ErrorCode::invalid_input,
           "d-ssim term needs images at least 11x11");
    double ssim_total = 0.0;
    for (int c = 0; c < rendered.channels; ++c) {
      std::vector<double> d_plane;
      ssim_total += ssim_channel(channel_plane(rendered, c),
                                 channel_plane(target, c), rendered.width,
                                 rendered.height, &d_plane);
      // d loss / d ssim = -lambda / 2, per-channel mean over channels
      double scale = -lambda_dssim / (2.0 * rendered.channels);
      for (std::size_t i = 0; i < d_plane.size(); ++i)
        result.d_image.data[i * rendered.channels + c] += scale * d_plane[i];
    }
    double mean_ssim = ssim_total / rendered.channels;
    result.loss += lambda_dssim * (1.0 - mean_ssim) / 2.0;
  }
  return result;
}

namespace {

void stable_softmax(std::vector<double>& logits) {
  double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

}  // namespace

Ce2dResult loss_2d(const std::vector<double>& feature, int width, int height,
                   const Classifier& classifier,
                   const std::vector<int>& target_class) {
  const int k = classifier.class_count;
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  if (feature.size() != pixels * kIdentityDim || target_class.size() != pixels)
    fail(ErrorCode::invalid_input, "loss_2d buffer sizes mismatch");

  Ce2dResult result;
  result.d_feature.assign(feature.size(), 0.0);
  result.d_weights.assign(classifier.weights.size(), 0.0);
  result.d_bias.assign(classifier.bias.size(), 0.0);

  for (int t : target_class)
    if (t < 0 || t >= k)
      fail(ErrorCode::invalid_input, "target class out of range");
  for (std::size_t i = 0; i < pixels; ++i)
    if (target_class[i] != 0) ++result.labeled_pixels;
  if (result.labeled_pixels == 0) return result;

  const double inv_n = 1.0 / static_cast<double>(result.labeled_pixels);
  std::vector<double> probs(k);
  double total = 0.0;
  for (std::size_t i = 0; i < pixels; ++i) {
    int target = target_class[i];
    if (target == 0) continue;
    const double* feat = feature.data() + i * kIdentityDim;
    classifier.logits(feat, probs.data());
    stable_softmax(probs);
    total -= std::log(std::max(probs[target], 1e-300));
    double* d_feat = result.d_feature.data() + i * kIdentityDim;
    for (int c = 0; c < k; ++c) {
      double d_logit = (probs[c] - (c == target ? 1.0 : 0.0)) * inv_n;
      const double* w = classifier.weights.data() +
                        static_cast<std::size_t>(c) * kIdentityDim;
      double* dw = result.d_weights.data() +
                   static_cast<std::size_t>(c) * kIdentityDim;
      for (int j = 0; j < kIdentityDim; ++j) {
        d_feat[j] += d_logit * w[j];
        dw[j] += d_logit * feat[j];
      }
      result.d_bias[c] += d_logit;
    }
  }
  result.loss = total * inv_n;
  return result;
}

Ce3dResult loss_3d(const GaussianField& field) {
  const int k = field.class_count();
  Ce3dResult result;
  result.d_identity.assign(field.size(), IdentityVec{});
  result.d_weights.assign(field.classifier.weights.size(), 0.0);
  result.d_bias.assign(field.classifier.bias.size(), 0.0);

  for (const auto& s : field.splats)
    if (s.class_label != 0) ++result.labeled_splats;
  if (result.labeled_splats == 0) return result;

  const double inv_n = 1.0 / static_cast<double>(result.labeled_splats);
  std::vector<double> probs(k);
  double total = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const GaussianSplat& s = field.splats[i];
    if (s.class_label == 0) continue;
    field.classifier.logits(s.identity.data(), probs.data());
    stable_softmax(probs);
    int target = static_cast<int>(s.class_label);
    total -= std::log(std::max(probs[target], 1e-300));
    for (int c = 0; c < k; ++c) {
      double d_logit = (probs[c] - (c == target ? 1.0 : 0.0)) * inv_n;
      const double* w = field.classifier.weights.data() +
                        static_cast<std::size_t>(c) * kIdentityDim;
      double* dw = result.d_weights.data() +
                   static_cast<std::size_t>(c) * kIdentityDim;
      for (int j = 0; j < kIdentityDim; ++j) {
        result.d_identity[i][j] += d_logit * w[j];
        dw[j] += d_logit * s.identity[j];
      }
      result.d_bias[c] += d_logit;
    }
  }
  result.loss = total * inv_n;
  return result;
}

}  // namespace segsplat
