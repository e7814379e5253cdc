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

#include "segsynth/refine.hpp"

#include <array>

#include "segsynth/error.hpp"

namespace segsynth {

void validate(const RefineConfig& cfg) {
  if (cfg.k < 1) throw Error(ErrorCode::InvalidArgument, "refine.k must be >= 1");
  if (!(cfg.majority > 0.5 && cfg.majority <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "refine.majority must lie in (0.5, 1]");
  }
  if (cfg.min_cluster_px < 0) {
    throw Error(ErrorCode::InvalidArgument, "refine.min_cluster_px must be >= 0");
  }
}

SegMask upsample_mask_nearest(const SegMask& mask, int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidArgument, "target size must be positive");
  }
  SegMask out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>(static_cast<std::int64_t>(y) * mask.height / height);
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>(static_cast<std::int64_t>(x) * mask.width / width);
      out.at(x, y) = mask.at(sx, sy);
    }
  }
  return out;
}

Matrix rgb_position_features(const RgbImage& image, double w_pos) {
  const int w = image.width, h = image.height;
  Matrix f(static_cast<std::size_t>(w) * h, 5);
  const double sx = w > 1 ? w_pos / (w - 1) : 0.0;
  const double sy = h > 1 ? w_pos / (h - 1) : 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      for (int c = 0; c < 3; ++c) f(p, c) = image.pixels[p * 3 + c] / 255.0;
      f(p, 3) = x * sx;
      f(p, 4) = y * sy;
    }
  }
  return f;
}

SegMask refine_mask(const RgbImage& image, const SegMask& low_mask, const RefineConfig& cfg) {
  validate(cfg);
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw Error(ErrorCode::ShapeMismatch, "image pixel buffer does not match its size");
  }
  for (auto v : low_mask.labels) {
    if (!is_valid_label(v)) throw Error(ErrorCode::InvalidLabel, "low-resolution mask label");
  }

  const Matrix features = rgb_position_features(image, cfg.w_pos_rgb);
  const auto fit =
      kmeans_fit(features, cfg.k, cfg.seed, cfg.kmeans, image.height, image.width);
  const ClusterLabeling regions = split_components(fit.labeling);
  const SegMask lifted = upsample_mask_nearest(low_mask, image.width, image.height);

  const std::size_t n_regions = static_cast<std::size_t>(regions.n_clusters);
  std::vector<std::array<std::size_t, 256>> hist(n_regions);
  for (auto& h : hist) h.fill(0);
  std::vector<std::size_t> size(n_regions, 0);
  for (std::size_t i = 0; i < regions.labels.size(); ++i) {
    ++hist[regions.labels[i]][lifted.labels[i]];
    ++size[regions.labels[i]];
  }

  std::vector<std::uint8_t> region_class(n_regions, kIgnoreId);
  for (std::size_t r = 0; r < n_regions; ++r) {
    if (cfg.min_cluster_px > 0 && size[r] < static_cast<std::size_t>(cfg.min_cluster_px)) continue;
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c) {
      if (hist[r][c] > hist[r][best]) best = c;
    }
    const double share = static_cast<double>(hist[r][best]) / static_cast<double>(size[r]);
    if (hist[r][best] > 0 && share > cfg.majority) region_class[r] = static_cast<std::uint8_t>(best);
  }

  SegMask out(image.width, image.height);
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    out.labels[i] = region_class[regions.labels[i]];
  }
  return out;
}

}  // namespace segsynth
