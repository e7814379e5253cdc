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

#include <span>
#include <vector>

#include "segsynth/condense.hpp"
#include "segsynth/types.hpp"

namespace segsynth {

/// Corner-aligned bilinear resize of a square channel-last map:
/// source coordinate = target coordinate * (src - 1) / (dst - 1).
/// Works for any positive sizes; used for both latent upsampling and the
/// cross-attention maps.
std::vector<double> bilinear_resize(std::span<const double> values, int src_res, int channels,
                                    int dst_res);

/// Upsamples an r x r x c map with r in {16, 32, 64} to target x target.
/// r == target returns the input unchanged.
std::vector<double> upsample_bilinear(std::span<const double> values, int resolution,
                                      int channels, int target = kLatentResolution);

/// Per-pixel features on the 64 x 64 latent grid: 3 columns per head
/// (z-scored), then x and y scaled to [0, w_pos].
struct FeatureMatrix {
  Matrix values;
  int grid_height = kLatentResolution;
  int grid_width = kLatentResolution;

  std::size_t n_pixels() const { return values.rows(); }
  std::size_t n_features() const { return values.cols(); }
};

FeatureMatrix assemble_features(std::span<const PcMap> pc_maps, double w_pos = 1.0);

/// Z-scores one column in place over all rows (population standard
/// deviation). Columns without spread become all zeros.
void zscore_column(Matrix& m, std::size_t col);

}  // namespace segsynth
