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

#include "segsynth/cluster.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "segsynth/error.hpp"
#include "segsynth/parallel.hpp"
#include "segsynth/random.hpp"

namespace segsynth {

namespace {

// Reductions are always done per fixed-size chunk and then merged in chunk
// order, so sums do not depend on how chunks are scheduled.
constexpr std::size_t kChunkRows = 1024;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

void check_inputs(const Matrix& points, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (static_cast<std::size_t>(k) > points.rows()) {
    throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " exceeds " +
                                          std::to_string(points.rows()) + " points");
  }
  for (double v : points.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "K-Means input is not finite");
  }
}

struct Assignment {
  std::vector<std::int32_t> labels;
  std::vector<double> dist2;
  Matrix sums;                      // k x d
  std::vector<std::size_t> counts;  // k
  double inertia = 0.0;
};

Assignment assign(const Matrix& points, const Matrix& centroids, int threads) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  const std::size_t k = centroids.rows();
  const std::size_t chunks = (n + kChunkRows - 1) / kChunkRows;

  Assignment a;
  a.labels.resize(n);
  a.dist2.resize(n);
  std::vector<Matrix> chunk_sums(chunks);
  std::vector<std::vector<std::size_t>> chunk_counts(chunks);
  std::vector<double> chunk_inertia(chunks, 0.0);

  parallel_for(chunks, threads, [&](std::size_t c) {
    Matrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    double inertia = 0.0;
    const std::size_t end = std::min(n, (c + 1) * kChunkRows);
    for (std::size_t i = c * kChunkRows; i < end; ++i) {
      const auto x = points.row(i);
      std::size_t best = 0;
      double best_d = squared_distance(x, centroids.row(0));
      for (std::size_t j = 1; j < k; ++j) {
        const double dj = squared_distance(x, centroids.row(j));
        if (dj < best_d) {
          best_d = dj;
          best = j;
        }
      }
      a.labels[i] = static_cast<std::int32_t>(best);
      a.dist2[i] = best_d;
      inertia += best_d;
      ++counts[best];
      auto s = sums.row(best);
      for (std::size_t j = 0; j < d; ++j) s[j] += x[j];
    }
    chunk_sums[c] = std::move(sums);
    chunk_counts[c] = std::move(counts);
    chunk_inertia[c] = inertia;
  });

  a.sums = Matrix(k, d);
  a.counts.assign(k, 0);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t i = 0; i < k * d; ++i) a.sums.data()[i] += chunk_sums[c].data()[i];
    for (std::size_t j = 0; j < k; ++j) a.counts[j] += chunk_counts[c][j];
    a.inertia += chunk_inertia[c];
  }
  return a;
}

KMeansResult lloyd(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& opt) {
  const std::size_t d = points.cols();
  Matrix centroids = kmeanspp_init(points, k, seed);
  KMeansResult result;

  Assignment a = assign(points, centroids, opt.threads);
  result.inertia_history.push_back(a.inertia);
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    Matrix next(k, d);
    std::vector<double> spare = a.dist2;
    for (int j = 0; j < k; ++j) {
      auto dst = next.row(j);
      if (a.counts[j] > 0) {
        const auto src = a.sums.row(j);
        for (std::size_t c = 0; c < d; ++c) dst[c] = src[c] / static_cast<double>(a.counts[j]);
        continue;
      }
      std::size_t far = 0;
      for (std::size_t i = 1; i < spare.size(); ++i) {
        if (spare[i] > spare[far]) far = i;
      }
      spare[far] = -1.0;  // one point per empty cluster
      const auto src = points.row(far);
      std::copy(src.begin(), src.end(), dst.begin());
    }
    double shift = 0.0;
    for (int j = 0; j < k; ++j) {
      shift = std::max(shift, std::sqrt(squared_distance(next.row(j), centroids.row(j))));
    }
    centroids = std::move(next);
    result.iterations = iter + 1;
    a = assign(points, centroids, opt.threads);
    result.inertia_history.push_back(a.inertia);
    if (shift < opt.tol) break;
  }

  // Renumber by first occurrence; centroids follow their labels.
  std::vector<std::int32_t> remap(k, -1);
  std::int32_t next_label = 0;
  for (auto& label : a.labels) {
    if (remap[label] < 0) remap[label] = next_label++;
    label = remap[label];
  }
  result.centroids = Matrix(k, d);
  std::int32_t unused = next_label;
  for (int j = 0; j < k; ++j) {
    const std::int32_t row = remap[j] >= 0 ? remap[j] : unused++;
    const auto src = centroids.row(j);
    std::copy(src.begin(), src.end(), result.centroids.row(row).begin());
  }
  result.labeling.labels = std::move(a.labels);
  result.labeling.k_requested = k;
  result.labeling.n_clusters = next_label;
  result.labeling.inertia = a.inertia;
  return result;
}

}  // namespace

Matrix kmeanspp_init(const Matrix& points, int k, std::uint64_t seed) {
  check_inputs(points, k);
  const std::size_t n = points.rows();
  SplitMix64 rng(seed);
  Matrix centroids(k, points.cols());
  std::vector<bool> chosen(n, false);

  auto take = [&](int slot, std::size_t index) {
    chosen[index] = true;
    const auto src = points.row(index);
    std::copy(src.begin(), src.end(), centroids.row(slot).begin());
  };

  take(0, rng.below(n));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), centroids.row(0));

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      std::size_t last_positive = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        last_positive = i;
        cumulative += d2[i];
        if (cumulative > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    take(c, pick);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), centroids.row(c)));
    }
  }
  return centroids;
}

KMeansResult kmeans_fit(const Matrix& points, int k, std::uint64_t seed,
                        const KMeansOptions& options, int grid_height, int grid_width) {
  check_inputs(points, k);
  if (grid_height == 0 && grid_width == 0) {
    grid_height = 1;
    grid_width = static_cast<int>(points.rows());
  }
  if (static_cast<std::size_t>(grid_height) * static_cast<std::size_t>(grid_width) !=
      points.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "grid does not cover every point exactly once");
  }
  KMeansResult best;
  const int restarts = std::max(1, options.n_init);
  for (int r = 0; r < restarts; ++r) {
    KMeansResult run = lloyd(points, k, seed + static_cast<std::uint64_t>(r), options);
    if (r == 0 || *run.labeling.inertia < *best.labeling.inertia) best = std::move(run);
  }
  best.labeling.height = grid_height;
  best.labeling.width = grid_width;
  return best;
}

ClusterLabeling split_components(const ClusterLabeling& labeling) {
  const int h = labeling.height;
  const int w = labeling.width;
  const std::size_t n = static_cast<std::size_t>(h) * w;
  if (labeling.labels.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "labeling size does not match its grid");
  }

  // Two-pass union-find labelling.
  std::vector<std::int32_t> parent;
  std::vector<std::int32_t> provisional(n);
  auto find = [&](std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) {
      parent[b] = a;
    } else {
      parent[a] = b;
    }
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const auto label = labeling.labels[i];
      const bool left = x > 0 && labeling.labels[i - 1] == label;
      const bool up = y > 0 && labeling.labels[i - w] == label;
      if (left && up) {
        provisional[i] = provisional[i - 1];
        unite(provisional[i - 1], provisional[i - w]);
      } else if (left) {
        provisional[i] = provisional[i - 1];
      } else if (up) {
        provisional[i] = provisional[i - w];
      } else {
        provisional[i] = static_cast<std::int32_t>(parent.size());
        parent.push_back(provisional[i]);
      }
    }
  }

  ClusterLabeling out;
  out.height = h;
  out.width = w;
  out.k_requested = labeling.k_requested;
  out.labels.resize(n);
  std::vector<std::int32_t> final_id(parent.size(), -1);
  std::int32_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(provisional[i]);
    if (final_id[root] < 0) final_id[root] = next++;
    out.labels[i] = final_id[root];
  }
  out.n_clusters = next;
  return out;
}

}  // namespace segsynth
