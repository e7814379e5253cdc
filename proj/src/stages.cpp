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

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "segsynth/error.hpp"
#include "segsynth/pipeline.hpp"
#include "segsynth/png_io.hpp"

namespace segsynth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& doc) {
  const std::string text = doc.dump(2) + "\n";
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
  }
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
}

const fs::path& input(const StageInputs& inputs, const std::string& key, const std::string& stage) {
  auto it = inputs.find(key);
  if (it == inputs.end() || it->second.empty()) {
    throw Error(ErrorCode::MissingInput, "stage '" + stage + "' needs input '" + key + "'");
  }
  return it->second;
}

const fs::path& existing(const StageInputs& inputs, const std::string& key,
                         const std::string& stage) {
  const fs::path& p = input(inputs, key, stage);
  if (!fs::exists(p)) {
    throw Error(ErrorCode::MissingInput, "input '" + key + "' does not exist: " + p.string());
  }
  return p;
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) make_dir(file.parent_path());
}

}  // namespace

void write_condense_output(const fs::path& dir, const std::vector<PcMap>& maps) {
  make_dir(dir);
  json index = json::array();
  for (int res : {16, 32, 64}) {
    std::vector<const PcMap*> group;
    for (const auto& m : maps) {
      if (m.resolution == res) group.push_back(&m);
    }
    if (group.empty()) continue;
    const std::string file = "pc_maps_r" + std::to_string(res) + ".atsb";
    std::vector<float> values;
    values.reserve(group.size() * res * res * 3);
    for (std::size_t g = 0; g < group.size(); ++g) {
      for (double v : group[g]->values) values.push_back(static_cast<float>(v));
      index.push_back({{"layer", group[g]->layer_name},
                       {"head", group[g]->head_id},
                       {"resolution", res},
                       {"tensor_file", file},
                       {"index", g}});
    }
    const std::vector<std::uint32_t> shape = {static_cast<std::uint32_t>(group.size()),
                                              static_cast<std::uint32_t>(res),
                                              static_cast<std::uint32_t>(res), 3};
    write_tensor(dir / file, shape, values);
  }
  write_json(dir / "index.json", {{"maps", index}});
}

void write_features(const fs::path& path, const FeatureMatrix& features) {
  std::vector<float> values(features.values.data().begin(), features.values.data().end());
  const std::vector<std::uint32_t> shape = {static_cast<std::uint32_t>(features.n_pixels()),
                                            static_cast<std::uint32_t>(features.n_features())};
  write_tensor(path, shape, values);
}

FeatureMatrix read_features(const fs::path& path) {
  const Tensor t = read_tensor(path);
  constexpr std::uint32_t kPixels = kLatentResolution * kLatentResolution;
  if (t.shape.size() != 2 || t.shape[0] != kPixels || t.shape[1] < 1) {
    throw Error(ErrorCode::ShapeMismatch, "feature tensor must have shape (4096, F)");
  }
  FeatureMatrix f;
  f.values = Matrix(t.shape[0], t.shape[1]);
  for (std::size_t i = 0; i < t.values.size(); ++i) f.values.data()[i] = t.values[i];
  return f;
}

void write_cluster_output(const fs::path& dir, const std::vector<int>& k_set,
                          const std::vector<ClusterLabeling>& sub_labelings) {
  if (k_set.size() != sub_labelings.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one labeling per K is required");
  }
  make_dir(dir);
  json files = json::array();
  for (std::size_t i = 0; i < k_set.size(); ++i) {
    const auto& l = sub_labelings[i];
    const std::string file = "clusters_" + std::to_string(i) + "_k" + std::to_string(k_set[i]) + ".atsb";
    std::vector<float> values(l.labels.begin(), l.labels.end());
    const std::vector<std::uint32_t> shape = {static_cast<std::uint32_t>(l.height),
                                              static_cast<std::uint32_t>(l.width)};
    write_tensor(dir / file, shape, values);
    files.push_back(file);
  }
  write_json(dir / "index.json", {{"k_set", k_set}, {"files", files}});
}

std::vector<ClusterLabeling> read_cluster_output(const fs::path& dir) {
  const json index = read_json(dir / "index.json");
  if (!index.contains("k_set") || !index.contains("files") ||
      index["k_set"].size() != index["files"].size()) {
    throw Error(ErrorCode::SchemaViolation, "cluster index.json is malformed");
  }
  std::vector<ClusterLabeling> out;
  for (std::size_t i = 0; i < index["files"].size(); ++i) {
    const Tensor t = read_tensor(dir / index["files"][i].get<std::string>());
    if (t.shape.size() != 2) throw Error(ErrorCode::ShapeMismatch, "cluster tensor must be 2-D");
    ClusterLabeling l;
    l.height = static_cast<int>(t.shape[0]);
    l.width = static_cast<int>(t.shape[1]);
    l.k_requested = index["k_set"][i].get<int>();
    l.labels.reserve(t.values.size());
    for (float v : t.values) {
      if (!(v >= 0.0f) || v != std::floor(v)) {
        throw Error(ErrorCode::SchemaViolation, "cluster ids must be non-negative integers");
      }
      l.labels.push_back(static_cast<std::int32_t>(v));
    }
    // Splitting is idempotent, so this only restores contiguous numbering.
    out.push_back(split_components(l));
  }
  return out;
}

void run_stage(const std::string& stage, const StageInputs& inputs, const PipelineConfig& cfg) {
  validate(cfg);
  if (stage == "condense") {
    const AttentionBundle bundle = read_bundle(existing(inputs, "bundle", stage));
    write_condense_output(input(inputs, "out", stage), condense_bundle(bundle));
  } else if (stage == "features") {
    const AttentionBundle bundle = read_bundle(existing(inputs, "bundle", stage));
    const fs::path& out = input(inputs, "out", stage);
    ensure_parent(out);
    write_features(out, assemble_features(condense_bundle(bundle), cfg.w_pos));
  } else if (stage == "cluster") {
    FeatureMatrix features;
    std::uint64_t seed = cfg.seed;
    if (inputs.contains("features")) {
      features = read_features(existing(inputs, "features", stage));
    } else {
      const AttentionBundle bundle = read_bundle(existing(inputs, "bundle", stage));
      features = assemble_features(condense_bundle(bundle), cfg.w_pos);
      seed = image_seed(cfg.seed, bundle.manifest.image_id);
    }
    const VoteConfig vc = cfg.vote_config();
    std::vector<ClusterLabeling> subs;
    for (int k : vc.k_set) {
      const auto fit = kmeans_fit(features.values, k, seed, vc.kmeans, features.grid_height,
                                  features.grid_width);
      subs.push_back(split_components(fit.labeling));
    }
    write_cluster_output(input(inputs, "out", stage), vc.k_set, subs);
  } else if (stage == "classify") {
    const AttentionBundle bundle = read_bundle(existing(inputs, "bundle", stage));
    const auto subs = read_cluster_output(existing(inputs, "clusters", stage));
    const CrossAttentionSet attention = cross_attention_set(bundle, cfg.normalization);
    const SegMask low = aggregate_votes(vote_stack_from_labelings(subs, attention, cfg.vote_config()));
    const fs::path& out = input(inputs, "out", stage);
    ensure_parent(out);
    write_mask_png(out, low);
  } else if (stage == "refine") {
    const RgbImage image = read_rgb_png(existing(inputs, "image", stage));
    const SegMask low = read_mask_png(existing(inputs, "low_mask", stage));
    const fs::path& out = input(inputs, "out", stage);
    ensure_parent(out);
    write_mask_png(out, refine_mask(image, low, cfg.refine));
  } else {
    throw Error(ErrorCode::UnknownStage, "unknown stage '" + stage + "'");
  }
}

}  // namespace segsynth
