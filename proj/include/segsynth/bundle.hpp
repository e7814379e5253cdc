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

#include <filesystem>
#include <string>
#include <vector>

#include "segsynth/tensor_io.hpp"
#include "segsynth/types.hpp"

namespace segsynth {

/// One captured self-attention layer. Its tensor has shape
/// (heads, resolution * resolution, feature_dim).
struct LayerSpec {
  std::string name;
  int resolution = 0;
  int heads = 0;
  int feature_dim = 0;
  std::string tensor_file;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// A cross-attention query token. The start-of-text token has is_sot set and
/// stands in for the background class.
struct TokenSpec {
  std::string token_text;
  int class_id = 0;
  bool is_sot = false;

  friend bool operator==(const TokenSpec&, const TokenSpec&) = default;
};

struct CrossAttentionSpec {
  std::vector<TokenSpec> tokens;
  int resolution = 0;
  std::string tensor_file;  // shape (tokens, resolution, resolution)

  friend bool operator==(const CrossAttentionSpec&, const CrossAttentionSpec&) = default;
};

struct BundleManifest {
  std::string image_id;
  std::string prompt;
  std::string image_file;
  int image_width = 0;
  int image_height = 0;
  int latent_resolution = kLatentResolution;
  std::vector<LayerSpec> self_attention_layers;
  CrossAttentionSpec cross_attention;

  int total_heads() const;
  friend bool operator==(const BundleManifest&, const BundleManifest&) = default;
};

/// Everything the engine needs for one generated image.
struct AttentionBundle {
  std::filesystem::path dir;
  BundleManifest manifest;
  std::vector<Tensor> self_attention;  // parallel to manifest.self_attention_layers
  Tensor cross_attention;
  RgbImage image;
};

inline constexpr const char* kManifestName = "manifest.json";

bool is_supported_resolution(int r);

/// Parses manifest.json text, checking field types and the schema-level
/// invariants (resolutions, single SoT token, unique class ids).
BundleManifest parse_manifest(const std::string& json_text);
std::string serialize_manifest(const BundleManifest& manifest);

/// Loads and fully validates a bundle directory.
AttentionBundle read_bundle(const std::filesystem::path& dir);

/// Writes manifest.json and every referenced tensor/image into dir.
void write_bundle(const std::filesystem::path& dir, const BundleManifest& manifest,
                  const std::vector<Tensor>& self_attention, const Tensor& cross_attention,
                  const RgbImage& image);

}  // namespace segsynth
