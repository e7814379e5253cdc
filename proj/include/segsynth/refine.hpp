// Copyright 2026 The segsynth Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

#include "segsynth/cluster.hpp"
#include "segsynth/types.hpp"

namespace segsynth {

struct RefineConfig {
  int k = 20;
  double majority = 0.66;  // a class must hold strictly more than this share
  double w_pos_rgb = 1.0;
  std::uint64_t seed = 0;
  int min_cluster_px = 0;  // 0 disables the size floor
  KMeansOptions kmeans;
};

void validate(const RefineConfig& cfg);

/// Nearest-neighbour label resize: target pixel (x, y) takes source pixel
/// (floor(x * w_src / w), floor(y * h_src / h)).
SegMask upsample_mask_nearest(const SegMask& mask, int width, int height);

/// Per-pixel colour/position features: R, G, B in [0, 1], then
/// x / (w - 1) * w_pos and y / (h - 1) * w_pos.
Matrix rgb_position_features(const RgbImage& image, double w_pos);

/// Lifts a latent-grid mask to image resolution. The image is clustered on
/// colour and position, clusters are split into 4-connected regions, and
/// each region takes the dominant class of the upsampled mask when that
/// class holds more than `majority` of its pixels (uncertain pixels count in
/// the denominator). Every other region becomes kIgnoreId.
SegMask refine_mask(const RgbImage& image, const SegMask& low_mask, const RefineConfig& cfg);

}  // namespace segsynth
