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

#include "segsynth/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "segsynth/error.hpp"

namespace segsynth {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, "config: " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) config_error("unknown key '" + where + key + "'");
  }
}

template <typename T>
void read_into(const json& obj, const char* key, T& dst) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for '") + key + "'");
  }
}

json kmeans_json(const KMeansOptions& k) {
  return {{"max_iter", k.max_iter}, {"tol", k.tol}, {"n_init", k.n_init}};
}

void read_kmeans(const json& obj, KMeansOptions& k, const std::string& where) {
  if (!obj.is_object()) config_error(where + " must be an object");
  reject_unknown(obj, {"max_iter", "tol", "n_init"}, where + ".");
  read_into(obj, "max_iter", k.max_iter);
  read_into(obj, "tol", k.tol);
  read_into(obj, "n_init", k.n_init);
}

}  // namespace

VoteConfig PipelineConfig::vote_config() const {
  VoteConfig v;
  v.k_set = k_set;
  v.t_set = t_set;
  v.background_boost = background_boost;
  v.kmeans = kmeans;
  v.kmeans.threads = 1;
  return v;
}

void validate(const PipelineConfig& cfg) {
  if (cfg.k_set.empty()) config_error("k_set must not be empty");
  for (int k : cfg.k_set) {
    if (k < 1) config_error("k_set entries must be >= 1");
  }
  if (cfg.t_set.empty()) config_error("t_set must not be empty");
  for (double t : cfg.t_set) {
    if (!(t > 0.0 && t < 1.0)) config_error("t_set entries must lie in (0, 1)");
  }
  if (!(cfg.background_boost > 0.0)) config_error("background_boost must be positive");
  if (!(cfg.w_pos >= 0.0)) config_error("w_pos must be >= 0");
  if (cfg.kmeans.max_iter < 1 || cfg.kmeans.n_init < 1 || !(cfg.kmeans.tol >= 0.0)) {
    config_error("kmeans needs max_iter >= 1, n_init >= 1, tol >= 0");
  }
  if (!(cfg.refine.w_pos_rgb >= 0.0)) config_error("refine.w_pos_rgb must be >= 0");
  validate(cfg.refine);
}

PipelineConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) config_error("root must be an object");
  reject_unknown(doc,
                 {"k_set", "t_set", "background_boost", "w_pos", "attention_normalization",
                  "kmeans", "refine", "seed", "workers", "io"},
                 "");

  PipelineConfig cfg;
  read_into(doc, "k_set", cfg.k_set);
  read_into(doc, "t_set", cfg.t_set);
  read_into(doc, "background_boost", cfg.background_boost);
  read_into(doc, "w_pos", cfg.w_pos);
  read_into(doc, "seed", cfg.seed);
  read_into(doc, "workers", cfg.workers);
  if (auto it = doc.find("attention_normalization"); it != doc.end()) {
    const std::string mode = it->is_string() ? it->get<std::string>() : "";
    if (mode == "per_map") {
      cfg.normalization = AttentionNormalization::kPerMap;
    } else if (mode == "global") {
      cfg.normalization = AttentionNormalization::kGlobal;
    } else {
      config_error("attention_normalization must be \"per_map\" or \"global\"");
    }
  }
  if (auto it = doc.find("kmeans"); it != doc.end()) read_kmeans(*it, cfg.kmeans, "kmeans");
  if (auto it = doc.find("refine"); it != doc.end()) {
    if (!it->is_object()) config_error("refine must be an object");
    reject_unknown(*it, {"k", "majority", "w_pos_rgb", "seed", "min_cluster_px", "kmeans"},
                   "refine.");
    read_into(*it, "k", cfg.refine.k);
    read_into(*it, "majority", cfg.refine.majority);
    read_into(*it, "w_pos_rgb", cfg.refine.w_pos_rgb);
    read_into(*it, "seed", cfg.refine.seed);
    read_into(*it, "min_cluster_px", cfg.refine.min_cluster_px);
    if (auto km = it->find("kmeans"); km != it->end()) {
      read_kmeans(*km, cfg.refine.kmeans, "refine.kmeans");
    }
  }
  if (auto it = doc.find("io"); it != doc.end()) {
    if (!it->is_object()) config_error("io must be an object");
    reject_unknown(*it, {"bundle_dir", "out_dir", "keep_intermediates"}, "io.");
    std::string bundle_dir, out_dir;
    read_into(*it, "bundle_dir", bundle_dir);
    read_into(*it, "out_dir", out_dir);
    read_into(*it, "keep_intermediates", cfg.io.keep_intermediates);
    cfg.io.bundle_dir = bundle_dir;
    cfg.io.out_dir = out_dir;
  }
  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, "cannot read config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  PipelineConfig cfg = parse_config(text.str());
  // Relative io paths are resolved against the config file's directory.
  const auto base = path.parent_path();
  if (!cfg.io.bundle_dir.empty() && cfg.io.bundle_dir.is_relative()) {
    cfg.io.bundle_dir = base / cfg.io.bundle_dir;
  }
  if (!cfg.io.out_dir.empty() && cfg.io.out_dir.is_relative()) {
    cfg.io.out_dir = base / cfg.io.out_dir;
  }
  return cfg;
}

std::string config_snapshot_json(const PipelineConfig& cfg) {
  json refine = {{"k", cfg.refine.k},
                 {"majority", cfg.refine.majority},
                 {"w_pos_rgb", cfg.refine.w_pos_rgb},
                 {"seed", cfg.refine.seed},
                 {"min_cluster_px", cfg.refine.min_cluster_px},
                 {"kmeans", kmeans_json(cfg.refine.kmeans)}};
  json doc = {{"k_set", cfg.k_set},
              {"t_set", cfg.t_set},
              {"background_boost", cfg.background_boost},
              {"w_pos", cfg.w_pos},
              {"attention_normalization",
               cfg.normalization == AttentionNormalization::kPerMap ? "per_map" : "global"},
              {"kmeans", kmeans_json(cfg.kmeans)},
              {"refine", refine},
              {"seed", cfg.seed}};
  return doc.dump();
}

}  // namespace segsynth
