// Copyright 2026 The segsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "core/field.hpp"
#include "core/types.hpp"

namespace segsplat {

// Structural similarity with an 11x11 Gaussian window (sigma 1.5), standard
// stabilizing constants for unit-range images, averaged over the valid
// window positions and channels. Requires both dimensions >= 11.
double ssim(const Image& a, const Image& b);

struct ImageLossResult {
  double loss = 0.0;
  Image d_image;  // gradient w.r.t. the rendered image
};

// (1 - lambda) * mean|delta| + lambda * (1 - SSIM) / 2.
ImageLossResult loss_img(const Image& rendered, const Image& target,
                         double lambda_dssim);

struct Ce2dResult {
  double loss = 0.0;
  std::vector<double> d_feature;   // H x W x 16
  std::vector<double> d_weights;   // K x 16
  std::vector<double> d_bias;      // K
  std::size_t labeled_pixels = 0;
};

// Mean cross-entropy of softmax(f(feature)) against per-pixel target
// classes; class 0 marks unlabeled pixels and is excluded. Returns
// gradients through both the feature image and the classifier.
Ce2dResult loss_2d(const std::vector<double>& feature, int width, int height,
                   const Classifier& classifier,
                   const std::vector<int>& target_class);

struct Ce3dResult {
  double loss = 0.0;
  std::vector<IdentityVec> d_identity;
  std::vector<double> d_weights;
  std::vector<double> d_bias;
  std::size_t labeled_splats = 0;
};

// Mean cross-entropy of softmax(f(identity)) against each labeled splat's
// own class; unlabeled splats are excluded.
Ce3dResult loss_3d(const GaussianField& field);

}  // namespace segsplat
