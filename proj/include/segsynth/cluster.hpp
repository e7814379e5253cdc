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
#include <optional>
#include <vector>

#include "segsynth/types.hpp"

namespace segsynth {

/// Integer cluster ids on an h x w grid (row-major). Labels are always
/// contiguous 0..n_clusters-1.
struct ClusterLabeling {
  int height = 0;
  int width = 0;
  std::vector<std::int32_t> labels;
  int k_requested = 0;
  int n_clusters = 0;
  std::optional<double> inertia;  // only set straight out of K-Means

  friend bool operator==(const ClusterLabeling&, const ClusterLabeling&) = default;
};

struct KMeansOptions {
  int max_iter = 300;
  double tol = 1e-6;   // stop once every centroid moves less than this (Euclidean)
  int n_init = 1;      // restarts; restart r uses seed + r, lowest inertia wins
  int threads = 1;     // only affects scheduling, never the result
};

struct KMeansResult {
  ClusterLabeling labeling;
  Matrix centroids;  // row i is the centroid of label i; unused centroids trail
  std::vector<double> inertia_history;  // inertia after every assignment step
  int iterations = 0;
};

/// k-means++ seeding driven by SplitMix64(seed). The first centre is drawn
/// uniformly; later centres with probability proportional to the squared
/// distance to the nearest chosen centre. When every remaining point
/// coincides with a chosen centre the lowest unchosen index is taken.
Matrix kmeanspp_init(const Matrix& points, int k, std::uint64_t seed);

/// Lloyd iterations from kmeanspp_init. Nearest-centroid ties go to the
/// lowest centroid index; an empty cluster is re-seeded with the point
/// farthest from its current centroid; final labels are renumbered by first
/// occurrence in row order. grid_height * grid_width must equal the row count
/// (pass 0 x 0 for a 1 x N strip).
KMeansResult kmeans_fit(const Matrix& points, int k, std::uint64_t seed,
                        const KMeansOptions& options = {}, int grid_height = 0,
                        int grid_width = 0);

/// Splits every cluster into its 4-connected components. New labels are
/// numbered in raster order of each component's first pixel.
ClusterLabeling split_components(const ClusterLabeling& labeling);

}  // namespace segsynth
