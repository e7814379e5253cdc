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
#include <span>
#include <vector>

#include "segsynth/bundle.hpp"
#include "segsynth/cluster.hpp"
#include "segsynth/features.hpp"
#include "segsynth/types.hpp"

namespace segsynth {

inline constexpr double kDefaultBackgroundBoost = 1.2;

struct ClassMap {
  int class_id = 0;  // 0 = background, taken from the SoT token
  std::vector<double> values;
};

/// Cross-attention maps on the latent grid, background first, then present
/// classes in ascending id order. Absent classes have no entry.
struct CrossAttentionSet {
  int resolution = kLatentResolution;
  std::vector<ClassMap> maps;
  bool normalized = false;
};

enum class AttentionNormalization { kPerMap, kGlobal };

/// Min-max rescale to [0, 1]; a constant map becomes all zeros.
std::vector<double> normalize_attention(std::span<const double> map);

/// Builds the set from a bundle: maps are resized to 64 x 64 and normalized
/// per map (default) or with one min/max shared by all tokens.
CrossAttentionSet cross_attention_set(
    const AttentionBundle& bundle,
    AttentionNormalization normalization = AttentionNormalization::kPerMap);

/// min(boost * t, 1) for background, t otherwise.
double effective_threshold(double t, bool is_background,
                           double background_boost = kDefaultBackgroundBoost);

/// 1 where value >= effective threshold.
std::vector<std::uint8_t> binarize(std::span<const double> map, double t, bool is_background,
                                   double background_boost = kDefaultBackgroundBoost);

/// |a & b| / |a | b|, 0 when both are empty.
double iou_binary(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Gives every sub-cluster the class whose binarized map has the highest IoU
/// with it and returns the per-pixel result. Ties go to the lowest class id;
/// clusters with zero IoU against everything become background.
std::vector<std::uint8_t> classify_clusters(const ClusterLabeling& sub_labeling,
                                            const CrossAttentionSet& attention, double t,
                                            double background_boost = kDefaultBackgroundBoost);

/// One label layer per (K, threshold) combination.
struct VoteStack {
  int height = kLatentResolution;
  int width = kLatentResolution;
  std::vector<std::vector<std::uint8_t>> votes;
};

/// Per pixel, the most frequent vote if it holds a strict majority of the
/// layers, otherwise kIgnoreId.
SegMask aggregate_votes(const VoteStack& stack);

struct VoteConfig {
  std::vector<int> k_set = {4, 7, 10};
  std::vector<double> t_set = {0.3, 0.5, 0.8};
  double background_boost = kDefaultBackgroundBoost;
  KMeansOptions kmeans;
};

/// Clusters the features once per K (same seed for every K), splits into
/// 4-connected sub-clusters and classifies them at every threshold. Layers
/// are ordered K-major. The split labelings are returned through
/// `sub_labelings` when it is non-null.
VoteStack build_vote_stack(const FeatureMatrix& features, const CrossAttentionSet& attention,
                           const VoteConfig& config, std::uint64_t seed,
                           std::vector<ClusterLabeling>* sub_labelings = nullptr);

/// Classifies precomputed sub-cluster labelings (one per K) into a vote stack.
VoteStack vote_stack_from_labelings(std::span<const ClusterLabeling> sub_labelings,
                                    const CrossAttentionSet& attention,
                                    const VoteConfig& config);

}  // namespace segsynth
