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

#include "segsynth/condense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segsynth/error.hpp"
#include "segsynth/linalg.hpp"
#include "segsynth/parallel.hpp"

namespace segsynth {

SymmetricEigen symmetric_eigen(const Matrix& symmetric, int max_sweeps) {
  const std::size_t n = symmetric.rows();
  if (symmetric.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "symmetric_eigen needs a square matrix");
  }
  Matrix a = symmetric;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      total += a(p, p) * a(p, p);
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    total += 2.0 * off;
    if (off == 0.0 || std::sqrt(off) <= 1e-16 * std::sqrt(total)) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymmetricEigen result;
  result.values.resize(n);
  result.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    result.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) result.vectors(i, j) = v(i, order[j]);
  }
  return result;
}

PcaModel pca_fit(const Matrix& samples) {
  const std::size_t n = samples.rows();
  const std::size_t d = samples.cols();
  if (n == 0 || d == 0) throw Error(ErrorCode::EmptyInput, "pca_fit needs N >= 1 and D >= 1");
  double max_abs = 0.0;
  for (double x : samples.data()) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, "pca_fit input is not finite");
    max_abs = std::max(max_abs, std::abs(x));
  }

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    bool constant = true;
    const double first = samples(0, j);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += samples(i, j);
      constant = constant && samples(i, j) == first;
    }
    // Constant columns get an exact mean so they contribute exactly zero.
    model.mean[j] = constant ? first : sum / static_cast<double>(n);
  }

  Matrix cov(d, d);
  if (n > 1) {
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) centered[j] = samples(i, j) - model.mean[j];
      for (std::size_t p = 0; p < d; ++p) {
        for (std::size_t q = p; q < d; ++q) cov(p, q) += centered[p] * centered[q];
      }
    }
    const double denom = static_cast<double>(n - 1);
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p; q < d; ++q) {
        cov(p, q) /= denom;
        cov(q, p) = cov(p, q);
      }
    }
  }

  const SymmetricEigen eig = symmetric_eigen(cov);
  const double top = std::max(eig.values.empty() ? 0.0 : eig.values[0], 0.0);
  const double noise_floor = (1e-9 * max_abs) * (1e-9 * max_abs);
  const double cutoff = std::max(1e-10 * top, noise_floor);

  model.components = Matrix(kPcaComponents, d);
  for (std::size_t c = 0; c < kPcaComponents && c < d; ++c) {
    const double lambda = eig.values[c];
    if (!(lambda > cutoff)) continue;
    model.explained_variance[c] = lambda;
    std::size_t lead = 0;
    for (std::size_t j = 1; j < d; ++j) {
      if (std::abs(eig.vectors(j, c)) > std::abs(eig.vectors(lead, c))) lead = j;
    }
    const double sign = eig.vectors(lead, c) < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) model.components(c, j) = sign * eig.vectors(j, c);
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& samples) {
  const std::size_t d = model.dim();
  if (samples.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "pca_transform expected " + std::to_string(d) +
                                                  " columns, got " +
                                                  std::to_string(samples.cols()));
  }
  Matrix scores(samples.rows(), kPcaComponents);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    for (std::size_t c = 0; c < kPcaComponents; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        acc += (samples(i, j) - model.mean[j]) * model.components(c, j);
      }
      scores(i, c) = acc;
    }
  }
  return scores;
}

Matrix head_matrix(const Tensor& layer_tensor, int head) {
  if (layer_tensor.shape.size() != 3 || head < 0 ||
      static_cast<std::uint32_t>(head) >= layer_tensor.shape[0]) {
    throw Error(ErrorCode::DimensionMismatch, "head index outside the layer tensor");
  }
  const std::size_t pixels = layer_tensor.shape[1];
  const std::size_t dim = layer_tensor.shape[2];
  Matrix m(pixels, dim);
  const float* src = layer_tensor.values.data() + static_cast<std::size_t>(head) * pixels * dim;
  for (std::size_t i = 0; i < pixels * dim; ++i) m.data()[i] = static_cast<double>(src[i]);
  return m;
}

std::vector<PcMap> condense_bundle(const AttentionBundle& bundle, int threads) {
  struct Job {
    std::size_t layer;
    int head;
  };
  std::vector<Job> jobs;
  const auto& layers = bundle.manifest.self_attention_layers;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (int h = 0; h < layers[l].heads; ++h) jobs.push_back({l, h});
  }
  std::vector<PcMap> maps(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const auto& layer = layers[jobs[i].layer];
    const Matrix x = head_matrix(bundle.self_attention[jobs[i].layer], jobs[i].head);
    const Matrix scores = pca_transform(pca_fit(x), x);
    maps[i] = PcMap{layer.name, jobs[i].head, layer.resolution, scores.data()};
  });
  return maps;
}

}  // namespace segsynth
