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

#include "segsynth/bundle.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "segsynth/error.hpp"
#include "segsynth/png_io.hpp"

namespace segsynth {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + ": missing field '" + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) schema_error(where + "." + key + " must be a string");
  return v.get<std::string>();
}

int require_int(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) schema_error(where + "." + key + " must be an integer");
  return v.get<int>();
}

void check_relative_path(const std::string& p, const std::string& where) {
  const std::filesystem::path path(p);
  if (p.empty() || path.is_absolute()) schema_error(where + " must be a relative path");
  for (const auto& part : path) {
    if (part == "..") schema_error(where + " must not leave the bundle directory");
  }
}

bool is_safe_id(const std::string& id) {
  if (id.empty() || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

bool is_supported_resolution(int r) { return r == 16 || r == 32 || r == 64; }

int BundleManifest::total_heads() const {
  int total = 0;
  for (const auto& layer : self_attention_layers) total += layer.heads;
  return total;
}

BundleManifest parse_manifest(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    schema_error(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("manifest root must be an object");

  BundleManifest m;
  m.image_id = require_string(doc, "image_id", "manifest");
  if (!is_safe_id(m.image_id)) {
    schema_error("image_id '" + m.image_id + "' must be a plain file-name token");
  }
  m.prompt = require_string(doc, "prompt", "manifest");
  m.image_file = require_string(doc, "image_file", "manifest");
  check_relative_path(m.image_file, "image_file");

  const json& size = require(doc, "image_size", "manifest");
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
      !size[1].is_number_integer()) {
    schema_error("image_size must be [width, height]");
  }
  m.image_width = size[0].get<int>();
  m.image_height = size[1].get<int>();
  if (m.image_width < kLatentResolution || m.image_height < kLatentResolution) {
    schema_error("image_size must be at least 64x64");
  }

  if (auto it = doc.find("latent_resolution"); it != doc.end()) {
    if (!it->is_number_integer()) schema_error("latent_resolution must be an integer");
    m.latent_resolution = it->get<int>();
  }
  if (m.latent_resolution != kLatentResolution) {
    schema_error("latent_resolution must be 64");
  }

  const json& layers = require(doc, "self_attention_layers", "manifest");
  if (!layers.is_array() || layers.empty()) {
    schema_error("self_attention_layers must be a non-empty array");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "self_attention_layers[" + std::to_string(i) + "]";
    if (!layers[i].is_object()) schema_error(where + " must be an object");
    LayerSpec layer;
    layer.name = require_string(layers[i], "name", where);
    layer.resolution = require_int(layers[i], "resolution", where);
    layer.heads = require_int(layers[i], "heads", where);
    layer.feature_dim = require_int(layers[i], "feature_dim", where);
    layer.tensor_file = require_string(layers[i], "tensor_file", where);
    if (!is_supported_resolution(layer.resolution)) {
      schema_error(where + ".resolution must be one of 16, 32, 64");
    }
    if (layer.heads < 1 || layer.feature_dim < 1) {
      schema_error(where + " needs heads >= 1 and feature_dim >= 1");
    }
    check_relative_path(layer.tensor_file, where + ".tensor_file");
    m.self_attention_layers.push_back(std::move(layer));
  }

  const json& cross = require(doc, "cross_attention", "manifest");
  if (!cross.is_object()) schema_error("cross_attention must be an object");
  m.cross_attention.resolution = require_int(cross, "resolution", "cross_attention");
  if (!is_supported_resolution(m.cross_attention.resolution)) {
    schema_error("cross_attention.resolution must be one of 16, 32, 64");
  }
  m.cross_attention.tensor_file = require_string(cross, "tensor_file", "cross_attention");
  check_relative_path(m.cross_attention.tensor_file, "cross_attention.tensor_file");
  const json& tokens = require(cross, "tokens", "cross_attention");
  if (!tokens.is_array() || tokens.empty()) {
    schema_error("cross_attention.tokens must be a non-empty array");
  }
  int sot_count = 0;
  std::set<int> seen;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string where = "cross_attention.tokens[" + std::to_string(i) + "]";
    if (!tokens[i].is_object()) schema_error(where + " must be an object");
    TokenSpec token;
    token.token_text = require_string(tokens[i], "token_text", where);
    const json& id = require(tokens[i], "class_id", where);
    if (id.is_string() && id.get<std::string>() == "sot") {
      token.is_sot = true;
      token.class_id = kBackgroundId;
      ++sot_count;
    } else if (id.is_number_integer()) {
      token.class_id = id.get<int>();
      // Background is only ever represented by the SoT token.
      if (token.class_id < 1 || token.class_id >= kNumClasses) {
        schema_error(where + ".class_id must be 1..20 or \"sot\"");
      }
      if (!seen.insert(token.class_id).second) {
        schema_error(where + ": duplicate class_id " + std::to_string(token.class_id));
      }
    } else {
      schema_error(where + ".class_id must be an integer or \"sot\"");
    }
    m.cross_attention.tokens.push_back(std::move(token));
  }
  if (sot_count == 0) throw Error(ErrorCode::MissingSotToken, "no token has class_id \"sot\"");
  if (sot_count > 1) schema_error("more than one token has class_id \"sot\"");
  return m;
}

std::string serialize_manifest(const BundleManifest& m) {
  json doc;
  doc["image_id"] = m.image_id;
  doc["prompt"] = m.prompt;
  doc["image_file"] = m.image_file;
  doc["image_size"] = {m.image_width, m.image_height};
  doc["latent_resolution"] = m.latent_resolution;
  json layers = json::array();
  for (const auto& l : m.self_attention_layers) {
    layers.push_back({{"name", l.name},
                      {"resolution", l.resolution},
                      {"heads", l.heads},
                      {"feature_dim", l.feature_dim},
                      {"tensor_file", l.tensor_file}});
  }
  doc["self_attention_layers"] = std::move(layers);
  json tokens = json::array();
  for (const auto& t : m.cross_attention.tokens) {
    json entry = {{"token_text", t.token_text}};
    if (t.is_sot) {
      entry["class_id"] = "sot";
    } else {
      entry["class_id"] = t.class_id;
    }
    tokens.push_back(std::move(entry));
  }
  doc["cross_attention"] = {{"tokens", std::move(tokens)},
                            {"resolution", m.cross_attention.resolution},
                            {"tensor_file", m.cross_attention.tensor_file}};
  return doc.dump(2) + "\n";
}

AttentionBundle read_bundle(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifestName;
  if (!std::filesystem::is_regular_file(manifest_path)) {
    throw Error(ErrorCode::MissingManifest, "no manifest.json in " + dir.string());
  }
  std::ifstream in(manifest_path);
  std::stringstream text;
  text << in.rdbuf();

  AttentionBundle bundle;
  bundle.dir = dir;
  bundle.manifest = parse_manifest(text.str());
  const BundleManifest& m = bundle.manifest;

  auto load = [&](const std::string& rel) {
    const auto path = dir / rel;
    if (!std::filesystem::is_regular_file(path)) {
      schema_error("referenced file '" + rel + "' does not exist");
    }
    return read_tensor(path);
  };

  for (const auto& layer : m.self_attention_layers) {
    Tensor t = load(layer.tensor_file);
    const std::vector<std::uint32_t> expected = {
        static_cast<std::uint32_t>(layer.heads),
        static_cast<std::uint32_t>(layer.resolution * layer.resolution),
        static_cast<std::uint32_t>(layer.feature_dim)};
    if (t.shape != expected) {
      throw Error(ErrorCode::ShapeMismatchWithManifest,
                  "layer '" + layer.name + "' tensor shape does not equal (heads, r*r, D)");
    }
    bundle.self_attention.push_back(std::move(t));
  }

  const auto& cross = m.cross_attention;
  bundle.cross_attention = load(cross.tensor_file);
  const std::vector<std::uint32_t> expected_cross = {
      static_cast<std::uint32_t>(cross.tokens.size()),
      static_cast<std::uint32_t>(cross.resolution), static_cast<std::uint32_t>(cross.resolution)};
  if (bundle.cross_attention.shape != expected_cross) {
    throw Error(ErrorCode::ShapeMismatchWithManifest,
                "cross-attention tensor shape does not equal (tokens, res, res)");
  }

  if (!std::filesystem::is_regular_file(dir / m.image_file)) {
    schema_error("image file '" + m.image_file + "' does not exist");
  }
  bundle.image = read_rgb_png(dir / m.image_file);
  if (bundle.image.width != m.image_width || bundle.image.height != m.image_height) {
    throw Error(ErrorCode::ShapeMismatchWithManifest, "image size differs from image_size");
  }
  return bundle;
}

void write_bundle(const std::filesystem::path& dir, const BundleManifest& manifest,
                  const std::vector<Tensor>& self_attention, const Tensor& cross_attention,
                  const RgbImage& image) {
  if (self_attention.size() != manifest.self_attention_layers.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one tensor per self-attention layer is required");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
  for (std::size_t i = 0; i < self_attention.size(); ++i) {
    write_tensor(dir / manifest.self_attention_layers[i].tensor_file, self_attention[i]);
  }
  write_tensor(dir / manifest.cross_attention.tensor_file, cross_attention);
  write_rgb_png(dir / manifest.image_file, image);
  const std::string text = serialize_manifest(manifest);
  write_file_bytes(dir / kManifestName,
                   {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace segsynth
