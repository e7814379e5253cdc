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

#include "segsynth/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "segsynth/catalog.hpp"
#include "segsynth/error.hpp"
#include "segsynth/parallel.hpp"
#include "segsynth/png_io.hpp"
#include "segsynth/random.hpp"
#include "segsynth/version.hpp"

namespace segsynth {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t image_seed(std::uint64_t seed, const std::string& image_id) {
  return seed ^ stable_hash(image_id);
}

SegmentationResult segment_bundle(const AttentionBundle& bundle, const PipelineConfig& cfg) {
  const std::uint64_t seed = image_seed(cfg.seed, bundle.manifest.image_id);
  SegmentationResult r;
  r.pc_maps = condense_bundle(bundle);
  r.features = assemble_features(r.pc_maps, cfg.w_pos);
  const CrossAttentionSet attention = cross_attention_set(bundle, cfg.normalization);
  r.votes = build_vote_stack(r.features, attention, cfg.vote_config(), seed, &r.sub_labelings);
  r.low_mask = aggregate_votes(r.votes);

  RefineConfig refine = cfg.refine;
  refine.seed = seed ^ cfg.refine.seed;
  refine.kmeans.threads = 1;
  r.mask = refine_mask(bundle.image, r.low_mask, refine);
  return r;
}

std::string DatasetManifest::to_json() const {
  json images_json = json::array();
  for (const auto& e : images) {
    images_json.push_back({{"image_id", e.image_id},
                           {"prompt", e.prompt},
                           {"image_file", e.image_file},
                           {"mask_file", e.mask_file},
                           {"uncertain_fraction", e.uncertain_fraction},
                           {"per_class_pixel_counts", e.per_class_pixel_counts}});
  }
  json failures_json = json::array();
  for (const auto& f : failures) {
    failures_json.push_back({{"bundle", f.bundle}, {"error", f.error}});
  }
  json doc;
  doc["engine_version"] = engine_version;
  doc["format_version"] = kBundleFormatVersion;
  doc["config"] = json::parse(config_snapshot);
  doc["images"] = std::move(images_json);
  doc["failures"] = std::move(failures_json);
  doc["wall_time_seconds"] = wall_time_seconds;
  return doc.dump(2) + "\n";
}

namespace {

ImageEntry describe(const AttentionBundle& bundle, const std::string& dir_name,
                    const SegMask& mask) {
  const auto& catalog = ClassCatalog::voc();
  ImageEntry e;
  e.image_id = bundle.manifest.image_id;
  e.prompt = bundle.manifest.prompt;
  e.image_file = (fs::path(dir_name) / bundle.manifest.image_file).generic_string();
  e.mask_file = e.image_id + ".png";
  std::array<std::uint64_t, 256> counts{};
  for (auto v : mask.labels) ++counts[v];
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[c] > 0) e.per_class_pixel_counts[catalog.names[c]] = counts[c];
  }
  if (counts[kIgnoreId] > 0) e.per_class_pixel_counts["uncertain"] = counts[kIgnoreId];
  e.uncertain_fraction =
      static_cast<double>(counts[kIgnoreId]) / static_cast<double>(mask.labels.size());
  return e;
}

void write_intermediates(const fs::path& dir, const SegmentationResult& r,
                         const PipelineConfig& cfg) {
  fs::create_directories(dir);
  write_condense_output(dir / "condense", r.pc_maps);
  write_features(dir / "features.atsb", r.features);
  write_cluster_output(dir / "clusters", cfg.k_set, r.sub_labelings);
  write_mask_png(dir / "low_mask.png", r.low_mask);
}

std::optional<std::string> peek_image_id(const fs::path& dir) {
  std::ifstream in(dir / kManifestName);
  if (!in) return std::nullopt;
  std::stringstream text;
  text << in.rdbuf();
  try {
    return parse_manifest(text.str()).image_id;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

PipelineRun run_pipeline(const PipelineConfig& cfg) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const fs::path& bundle_dir = cfg.io.bundle_dir;
  const fs::path& out_dir = cfg.io.out_dir;

  std::vector<fs::path> dirs;
  if (fs::is_directory(bundle_dir)) {
    for (const auto& entry : fs::directory_iterator(bundle_dir)) {
      if (entry.is_directory()) dirs.push_back(entry.path());
    }
  }
  if (dirs.empty()) {
    throw Error(ErrorCode::NoBundles, "no bundle directories under " + bundle_dir.string());
  }
  std::sort(dirs.begin(), dirs.end());

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw Error(ErrorCode::UnwritableOutput, "cannot create " + out_dir.string());
  }

  // Two bundles with one image_id would race for the same mask file; the
  // later directory (in name order) is rejected up front.
  std::vector<std::optional<std::string>> rejected(dirs.size());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (auto id = peek_image_id(dirs[i]); id && !ids.insert(*id).second) {
      rejected[i] = "SchemaViolation: duplicate image_id '" + *id + "'";
    }
  }

  std::vector<std::optional<ImageEntry>> entries(dirs.size());
  std::vector<std::optional<std::string>> errors(dirs.size());
  parallel_for(dirs.size(), cfg.workers, [&](std::size_t i) {
    if (rejected[i]) {
      errors[i] = rejected[i];
      return;
    }
    try {
      const AttentionBundle bundle = read_bundle(dirs[i]);
      const SegmentationResult result = segment_bundle(bundle, cfg);
      if (cfg.io.keep_intermediates) {
        write_intermediates(out_dir / "intermediates" / bundle.manifest.image_id, result, cfg);
      }
      const ImageEntry entry = describe(bundle, dirs[i].filename().string(), result.mask);
      write_mask_png(out_dir / entry.mask_file, result.mask);
      entries[i] = entry;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  PipelineRun run;
  DatasetManifest& manifest = run.manifest;
  manifest.engine_version = kEngineVersion;
  manifest.config_snapshot = config_snapshot_json(cfg);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (entries[i]) manifest.images.push_back(std::move(*entries[i]));
    if (errors[i]) manifest.failures.push_back({dirs[i].filename().string(), *errors[i]});
  }
  std::sort(manifest.images.begin(), manifest.images.end(),
            [](const ImageEntry& a, const ImageEntry& b) { return a.image_id < b.image_id; });
  manifest.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string text = manifest.to_json();
  try {
    write_file_bytes(out_dir / kManifestName,
                     {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  } catch (const Error& e) {
    throw Error(ErrorCode::UnwritableOutput, e.what());
  }

  if (manifest.failures.empty()) {
    run.status = ExitStatus::kSuccess;
  } else if (manifest.images.empty()) {
    run.status = ExitStatus::kFatal;
  } else {
    run.status = ExitStatus::kPartial;
  }
  return run;
}

}  // namespace segsynth
