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

#include <array>
#include <string>
#include <vector>

#include "segsynth/bundle.hpp"
#include "segsynth/types.hpp"

namespace segsynth {

inline constexpr int kPcaComponents = 3;

/// Top-3 principal axes of one head's per-pixel features.
///
/// Components are stored as rows of a 3 x D matrix. Axes beyond the rank of
/// the data (or beyond D) are zero vectors with zero explained variance.
/// Each non-zero component is signed so that its largest-magnitude loading
/// is non-negative.
struct PcaModel {
  std::vector<double> mean;
  Matrix components;
  std::array<double, kPcaComponents> explained_variance{};

  std::size_t dim() const noexcept { return mean.size(); }
};

/// Fits on an N x D matrix using the sample covariance (divisor N - 1; a
/// single row has zero covariance).
PcaModel pca_fit(const Matrix& samples);

/// (samples - mean) * components^T, an N x 3 matrix.
Matrix pca_transform(const PcaModel& model, const Matrix& samples);

/// Principal-component scores of one attention head, pixel-major:
/// values[(y * resolution + x) * 3 + c].
struct PcMap {
  std::string layer_name;
  int head_id = 0;
  int resolution = 0;
  std::vector<double> values;
};

/// Copies head `head` of a (H, r*r, D) layer tensor into an (r*r) x D matrix.
Matrix head_matrix(const Tensor& layer_tensor, int head);

/// One PcMap per (layer, head) in manifest order. `threads` only changes
/// scheduling; the result is identical for any value.
std::vector<PcMap> condense_bundle(const AttentionBundle& bundle, int threads = 1);

}  // namespace segsynth
