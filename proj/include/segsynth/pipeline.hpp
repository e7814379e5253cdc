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
#include <map>
#include <string>
#include <vector>

#include "segsynth/bundle.hpp"
#include "segsynth/classify.hpp"
#include "segsynth/condense.hpp"
#include "segsynth/config.hpp"
#include "segsynth/features.hpp"

namespace segsynth {

/// Everything produced for one image, stage by stage.
struct SegmentationResult {
  std::vector<PcMap> pc_maps;
  FeatureMatrix features;
  std::vector<ClusterLabeling> sub_labelings;  // one per K, after splitting
  VoteStack votes;
  SegMask low_mask;  // 64 x 64
  SegMask mask;      // image resolution
};

/// seed XOR FNV-1a(image_id): independent of batch order.
std::uint64_t image_seed(std::uint64_t seed, const std::string& image_id);

/// Runs condense -> features -> cluster -> classify -> refine on one bundle.
SegmentationResult segment_bundle(const AttentionBundle& bundle, const PipelineConfig& cfg);

struct ImageEntry {
  std::string image_id;
  std::string prompt;
  std::string image_file;
  std::string mask_file;
  double uncertain_fraction = 0.0;
  std::map<std::string, std::uint64_t> per_class_pixel_counts;  // non-zero classes only
};

struct BundleFailure {
  std::string bundle;  // directory name inside bundle_dir
  std::string error;
};

struct DatasetManifest {
  std::vector<ImageEntry> images;  // sorted by image_id
  std::vector<BundleFailure> failures;  // sorted by bundle
  std::string config_snapshot;
  std::string engine_version;
  double wall_time_seconds = 0.0;

  /// Serialized manifest. wall_time_seconds is the only run-dependent field.
  std::string to_json() const;
};

enum class ExitStatus : int { kSuccess = 0, kFatal = 1, kPartial = 2 };

struct PipelineRun {
  DatasetManifest manifest;
  ExitStatus status = ExitStatus::kSuccess;
};

/// Processes every sub-directory of cfg.io.bundle_dir. Per-bundle failures
/// are recorded in the manifest and skipped. Writes <image_id>.png and
/// manifest.json to cfg.io.out_dir.
PipelineRun run_pipeline(const PipelineConfig& cfg);

// Per-stage debugging surface ------------------------------------------------

/// Named stage inputs, e.g. {"bundle": dir, "out": path}.
using StageInputs = std::map<std::string, std::filesystem::path>;

/// Stages and the inputs they take:
///   condense  bundle, out (directory: pc_maps_r<r>.atsb + index.json)
///   features  bundle, out (ATSB (4096, F))
///   cluster   bundle | features, out (directory: clusters_k<K>.atsb + index.json)
///   classify  bundle, clusters, out (64 x 64 mask PNG)
///   refine    image, low_mask, out (mask PNG at image resolution)
void run_stage(const std::string& stage, const StageInputs& inputs, const PipelineConfig& cfg);

void write_condense_output(const std::filesystem::path& dir, const std::vector<PcMap>& maps);
void write_features(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix read_features(const std::filesystem::path& path);
void write_cluster_output(const std::filesystem::path& dir, const std::vector<int>& k_set,
                          const std::vector<ClusterLabeling>& sub_labelings);
std::vector<ClusterLabeling> read_cluster_output(const std::filesystem::path& dir);

}  // namespace segsynth
