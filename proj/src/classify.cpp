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

#include "segsynth/classify.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "segsynth/error.hpp"

namespace segsynth {

namespace {

void check_finite(std::span<const double> map) {
  for (double v : map) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "attention map is not finite");
  }
}

std::vector<double> rescale(std::span<const double> map, double lo, double hi) {
  std::vector<double> out(map.size(), 0.0);
  if (!(hi > lo)) return out;
  const double range = hi - lo;
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = (map[i] - lo) / range;
  return out;
}

}  // namespace

std::vector<double> normalize_attention(std::span<const double> map) {
  check_finite(map);
  if (map.empty()) return {};
  const auto [lo, hi] = std::minmax_element(map.begin(), map.end());
  return rescale(map, *lo, *hi);
}

CrossAttentionSet cross_attention_set(const AttentionBundle& bundle,
                                      AttentionNormalization normalization) {
  const auto& spec = bundle.manifest.cross_attention;
  const int res = spec.resolution;
  const std::size_t plane = static_cast<std::size_t>(res) * res;

  CrossAttentionSet set;
  for (std::size_t t = 0; t < spec.tokens.size(); ++t) {
    std::vector<double> raw(plane);
    const float* src = bundle.cross_attention.values.data() + t * plane;
    for (std::size_t i = 0; i < plane; ++i) raw[i] = static_cast<double>(src[i]);
    check_finite(raw);
    set.maps.push_back(
        ClassMap{spec.tokens[t].class_id, bilinear_resize(raw, res, 1, kLatentResolution)});
  }
  std::stable_sort(set.maps.begin(), set.maps.end(),
                   [](const ClassMap& a, const ClassMap& b) { return a.class_id < b.class_id; });

  if (normalization == AttentionNormalization::kPerMap) {
    for (auto& m : set.maps) m.values = normalize_attention(m.values);
  } else {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& m : set.maps) {
      for (double v : m.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    for (auto& m : set.maps) m.values = rescale(m.values, lo, hi);
  }
  set.normalized = true;
  return set;
}

double effective_threshold(double t, bool is_background, double background_boost) {
  return is_background ? std::min(background_boost * t, 1.0) : t;
}

std::vector<std::uint8_t> binarize(std::span<const double> map, double t, bool is_background,
                                   double background_boost) {
  const double t_eff = effective_threshold(t, is_background, background_boost);
  std::vector<std::uint8_t> out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = map[i] >= t_eff ? 1 : 0;
  return out;
}

double iou_binary(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "IoU operands differ in size");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0, y = b[i] != 0;
    inter += (x && y) ? 1 : 0;
    uni += (x || y) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::uint8_t> classify_clusters(const ClusterLabeling& sub_labeling,
                                            const CrossAttentionSet& attention, double t,
                                            double background_boost) {
  const std::size_t n = sub_labeling.labels.size();
  const std::size_t n_clusters = static_cast<std::size_t>(sub_labeling.n_clusters);
  std::vector<std::size_t> cluster_size(n_clusters, 0);
  for (auto l : sub_labeling.labels) ++cluster_size[l];

  std::vector<std::uint8_t> best_class(n_clusters, kBackgroundId);
  std::vector<double> best_iou(n_clusters, 0.0);
  std::vector<std::size_t> inter(n_clusters);

  // Ties go to the lowest class id whatever order the maps arrive in.
  for (const auto& cls : attention.maps) {
    if (cls.values.size() != n) {
      throw Error(ErrorCode::ShapeMismatch, "attention map does not match the labeling grid");
    }
    const auto mask = binarize(cls.values, t, cls.class_id == kBackgroundId, background_boost);
    std::size_t positives = 0;
    std::fill(inter.begin(), inter.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask[i] == 0) continue;
      ++positives;
      ++inter[sub_labeling.labels[i]];
    }
    for (std::size_t c = 0; c < n_clusters; ++c) {
      const std::size_t uni = cluster_size[c] + positives - inter[c];
      const double iou = uni == 0 ? 0.0 : static_cast<double>(inter[c]) / static_cast<double>(uni);
      if (iou > best_iou[c] ||
          (iou > 0.0 && iou == best_iou[c] && cls.class_id < best_class[c])) {
        best_iou[c] = iou;
        best_class[c] = static_cast<std::uint8_t>(cls.class_id);
      }
    }
  }

  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = best_class[sub_labeling.labels[i]];
  return out;
}

SegMask aggregate_votes(const VoteStack& stack) {
  if (stack.votes.empty()) throw Error(ErrorCode::EmptyInput, "vote stack has no layers");
  const std::size_t n = static_cast<std::size_t>(stack.height) * stack.width;
  for (const auto& layer : stack.votes) {
    if (layer.size() != n) throw Error(ErrorCode::ShapeMismatch, "vote layer has wrong size");
  }
  const std::size_t v = stack.votes.size();
  SegMask mask(stack.width, stack.height, kIgnoreId);
  std::array<std::size_t, 256> counts{};
  for (std::size_t i = 0; i < n; ++i) {
    counts.fill(0);
    for (const auto& layer : stack.votes) ++counts[layer[i]];
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
      if (counts[c] > counts[best]) best = c;
    }
    if (2 * counts[best] > v) mask.labels[i] = static_cast<std::uint8_t>(best);
  }
  return mask;
}

VoteStack vote_stack_from_labelings(std::span<const ClusterLabeling> sub_labelings,
                                    const CrossAttentionSet& attention,
                                    const VoteConfig& config) {
  VoteStack stack;
  for (const auto& sub : sub_labelings) {
    stack.height = sub.height;
    stack.width = sub.width;
    for (double t : config.t_set) {
      stack.votes.push_back(classify_clusters(sub, attention, t, config.background_boost));
    }
  }
  return stack;
}

VoteStack build_vote_stack(const FeatureMatrix& features, const CrossAttentionSet& attention,
                           const VoteConfig& config, std::uint64_t seed,
                           std::vector<ClusterLabeling>* sub_labelings) {
  std::vector<ClusterLabeling> subs;
  for (int k : config.k_set) {
    const auto fit = kmeans_fit(features.values, k, seed, config.kmeans, features.grid_height,
                                features.grid_width);
    subs.push_back(split_components(fit.labeling));
  }
  VoteStack stack = vote_stack_from_labelings(subs, attention, config);
  if (sub_labelings != nullptr) *sub_labelings = std::move(subs);
  return stack;
}

}  // namespace segsynth
