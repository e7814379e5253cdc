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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "segsynth/config.hpp"
#include "segsynth/error.hpp"
#include "segsynth/metrics.hpp"
#include "segsynth/pipeline.hpp"
#include "segsynth/tensor_io.hpp"
#include "segsynth/version.hpp"

namespace fs = std::filesystem;
using namespace segsynth;

namespace {

PipelineConfig config_or_default(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segsynth: semantic masks from diffusion attention bundles"};
  app.set_version_flag("--version",
                       std::string("segsynth ") + kEngineVersion +
                           " (bundle format v" + std::to_string(kBundleFormatVersion) +
                           ", ATSB v" + std::to_string(kAtsbVersion) + ")");
  app.require_subcommand(1);

  std::string config_path;
  std::string bundles, out, bundle, features, clusters, image, low_mask, pred, gt, json_out;
  int workers = -1;
  bool keep = false;
  bool abstain_as_background = false;

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage over a bundle directory");
  pipeline->add_option("--config", config_path, "Pipeline config JSON")->required();
  pipeline->add_option("--bundles", bundles, "Override io.bundle_dir");
  pipeline->add_option("--out", out, "Override io.out_dir");
  pipeline->add_option("--workers", workers, "Override worker count (0 = all cores)");
  pipeline->add_flag("--keep-intermediates", keep, "Write per-stage artifacts");

  auto* condense = app.add_subcommand("condense", "Per-head PCA maps for one bundle");
  condense->add_option("--bundle", bundle)->required();
  condense->add_option("--out", out, "Output directory")->required();
  condense->add_option("--config", config_path);

  auto* feat = app.add_subcommand("features", "Assembled 4096 x F feature matrix");
  feat->add_option("--bundle", bundle)->required();
  feat->add_option("--out", out, "Output .atsb file")->required();
  feat->add_option("--config", config_path);

  auto* cluster = app.add_subcommand("cluster", "K-Means + connected components per K");
  auto* cluster_bundle = cluster->add_option("--bundle", bundle);
  auto* cluster_features = cluster->add_option("--features", features, "Features .atsb file");
  cluster_bundle->excludes(cluster_features);
  cluster->add_option("--out", out, "Output directory")->required();
  cluster->add_option("--config", config_path);

  auto* classify = app.add_subcommand("classify", "64 x 64 mask from clusters + cross-attention");
  classify->add_option("--bundle", bundle)->required();
  classify->add_option("--clusters", clusters, "Directory written by 'cluster'")->required();
  classify->add_option("--out", out, "Output mask PNG")->required();
  classify->add_option("--config", config_path);

  auto* refine = app.add_subcommand("refine", "Lift a 64 x 64 mask to image resolution");
  refine->add_option("--image", image)->required();
  refine->add_option("--low-mask", low_mask)->required();
  refine->add_option("--out", out, "Output mask PNG")->required();
  refine->add_option("--config", config_path);

  auto* eval = app.add_subcommand("eval", "Per-class IoU / accuracy and mIoU");
  eval->add_option("--pred", pred, "Predicted mask directory")->required();
  eval->add_option("--gt", gt, "Ground-truth mask directory")->required();
  eval->add_option("--json", json_out, "Also write the JSON report here");
  eval->add_flag("--abstain-as-background", abstain_as_background,
                 "Score predicted 255 as background instead of a miss");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pipeline) {
      PipelineConfig cfg = load_config(config_path);
      if (!bundles.empty()) cfg.io.bundle_dir = bundles;
      if (!out.empty()) cfg.io.out_dir = out;
      if (workers >= 0) cfg.workers = workers;
      if (keep) cfg.io.keep_intermediates = true;
      const PipelineRun run = run_pipeline(cfg);
      std::cout << run.manifest.images.size() << " masks written to " << cfg.io.out_dir.string()
                << ", " << run.manifest.failures.size() << " bundle(s) failed\n";
      for (const auto& f : run.manifest.failures) {
        std::cerr << "  " << f.bundle << ": " << f.error << "\n";
      }
      return static_cast<int>(run.status);
    }
    if (*eval) {
      const EvalReport report = evaluate_dirs(
          pred, gt, abstain_as_background ? AbstainPolicy::kAsBackground : AbstainPolicy::kFalseNegative);
      std::cout << "Acc is per-class recall, TP / (TP + FN)\n" << report.to_table();
      if (!json_out.empty()) {
        std::ofstream(json_out) << report.to_json();
      } else {
        std::cout << report.to_json();
      }
      return 0;
    }

    const PipelineConfig cfg = config_or_default(config_path);
    StageInputs inputs{{"out", out}};
    std::string stage;
    if (*condense) {
      stage = "condense";
      inputs["bundle"] = bundle;
    } else if (*feat) {
      stage = "features";
      inputs["bundle"] = bundle;
    } else if (*cluster) {
      stage = "cluster";
      if (!features.empty()) {
        inputs["features"] = features;
      } else {
        inputs["bundle"] = bundle;
      }
    } else if (*classify) {
      stage = "classify";
      inputs["bundle"] = bundle;
      inputs["clusters"] = clusters;
    } else if (*refine) {
      stage = "refine";
      inputs["image"] = image;
      inputs["low_mask"] = low_mask;
    }
    run_stage(stage, inputs, cfg);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
