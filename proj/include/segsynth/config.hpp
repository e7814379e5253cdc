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
#include <filesystem>
#include <string>
#include <vector>

#include "segsynth/classify.hpp"
#include "segsynth/cluster.hpp"
#include "segsynth/refine.hpp"

namespace segsynth {

struct IoConfig {
  std::filesystem::path bundle_dir;
  std::filesystem::path out_dir;
  bool keep_intermediates = false;
};

/// Every tunable of the engine. Defaults are the reference settings:
/// K in {4, 7, 10}, thresholds {0.3, 0.5, 0.8}, background boost 1.2,
/// refinement with K = 20 and a 66% majority.
struct PipelineConfig {
  std::vector<int> k_set = {4, 7, 10};
  std::vector<double> t_set = {0.3, 0.5, 0.8};
  double background_boost = kDefaultBackgroundBoost;
  double w_pos = 1.0;
  AttentionNormalization normalization = AttentionNormalization::kPerMap;
  KMeansOptions kmeans;
  RefineConfig refine;
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = available parallelism
  IoConfig io;

  VoteConfig vote_config() const;
};

void validate(const PipelineConfig& cfg);

/// Parses the JSON config. Missing keys keep their defaults; unknown keys
/// are rejected so typos do not silently fall back to defaults.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::filesystem::path& path);

/// The algorithmic settings only (no paths, no worker count): the part of
/// the configuration that can influence output pixels.
std::string config_snapshot_json(const PipelineConfig& cfg);

}  // namespace segsynth
