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

#include "segsynth/features.hpp"

#include <cmath>

#include "segsynth/bundle.hpp"
#include "segsynth/error.hpp"

namespace segsynth {

std::vector<double> bilinear_resize(std::span<const double> values, int src_res, int channels,
                                    int dst_res) {
  if (src_res < 1 || dst_res < 1 || channels < 1) {
    throw Error(ErrorCode::InvalidArgument, "bilinear_resize needs positive sizes");
  }
  const std::size_t src_px = static_cast<std::size_t>(src_res) * src_res;
  if (values.size() != src_px * channels) {
    throw Error(ErrorCode::DimensionMismatch, "map size does not match r*r*c");
  }
  if (src_res == dst_res) return {values.begin(), values.end()};

  const double scale =
      dst_res > 1 ? static_cast<double>(src_res - 1) / static_cast<double>(dst_res - 1) : 0.0;
  std::vector<int> lo(dst_res), hi(dst_res);
  std::vector<double> frac(dst_res);
  for (int i = 0; i < dst_res; ++i) {
    const double s = i * scale;
    lo[i] = std::min(static_cast<int>(std::floor(s)), src_res - 1);
    hi[i] = std::min(lo[i] + 1, src_res - 1);
    frac[i] = s - lo[i];
  }

  std::vector<double> out(static_cast<std::size_t>(dst_res) * dst_res * channels);
  auto at = [&](int y, int x, int c) {
    return values[(static_cast<std::size_t>(y) * src_res + x) * channels + c];
  };
  for (int y = 0; y < dst_res; ++y) {
    for (int x = 0; x < dst_res; ++x) {
      for (int c = 0; c < channels; ++c) {
        const double v00 = at(lo[y], lo[x], c), v01 = at(lo[y], hi[x], c);
        const double v10 = at(hi[y], lo[x], c), v11 = at(hi[y], hi[x], c);
        // a + (b - a) * f keeps constant regions exactly constant.
        const double top = v00 + (v01 - v00) * frac[x];
        const double bottom = v10 + (v11 - v10) * frac[x];
        out[(static_cast<std::size_t>(y) * dst_res + x) * channels + c] =
            top + (bottom - top) * frac[y];
      }
    }
  }
  return out;
}

std::vector<double> upsample_bilinear(std::span<const double> values, int resolution,
                                      int channels, int target) {
  if (!is_supported_resolution(resolution) || resolution > target) {
    throw Error(ErrorCode::UnsupportedResolution,
                "cannot upsample resolution " + std::to_string(resolution) + " to " +
                    std::to_string(target));
  }
  return bilinear_resize(values, resolution, channels, target);
}

void zscore_column(Matrix& m, std::size_t col) {
  const std::size_t n = m.rows();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += m(i, col);
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = m(i, col) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  if (!(sd > 1e-12 * (1.0 + std::abs(mean)))) {
    for (std::size_t i = 0; i < n; ++i) m(i, col) = 0.0;
    return;
  }
  for (std::size_t i = 0; i < n; ++i) m(i, col) = (m(i, col) - mean) / sd;
}

FeatureMatrix assemble_features(std::span<const PcMap> pc_maps, double w_pos) {
  if (pc_maps.empty()) throw Error(ErrorCode::EmptyInput, "assemble_features needs a PcMap");
  constexpr int kGrid = kLatentResolution;
  constexpr std::size_t kPixels = static_cast<std::size_t>(kGrid) * kGrid;
  const std::size_t pc_cols = pc_maps.size() * kPcaComponents;

  FeatureMatrix features;
  features.values = Matrix(kPixels, pc_cols + 2);
  for (std::size_t m = 0; m < pc_maps.size(); ++m) {
    const auto up = upsample_bilinear(pc_maps[m].values, pc_maps[m].resolution, kPcaComponents);
    for (std::size_t p = 0; p < kPixels; ++p) {
      for (int c = 0; c < kPcaComponents; ++c) {
        const double v = up[p * kPcaComponents + c];
        if (!std::isfinite(v)) {
          throw Error(ErrorCode::NonFiniteInput, "principal-component scores are not finite");
        }
        features.values(p, m * kPcaComponents + c) = v;
      }
    }
  }
  for (std::size_t c = 0; c < pc_cols; ++c) zscore_column(features.values, c);

  for (int y = 0; y < kGrid; ++y) {
    for (int x = 0; x < kGrid; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * kGrid + x;
      features.values(p, pc_cols) = static_cast<double>(x) / (kGrid - 1) * w_pos;
      features.values(p, pc_cols + 1) = static_cast<double>(y) / (kGrid - 1) * w_pos;
    }
  }
  return features;
}

}  // namespace segsynth
