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
#include <utility>
#include <vector>

#include "segsynth/bundle.hpp"
#include "segsynth/catalog.hpp"
#include "segsynth/random.hpp"
#include "segsynth/types.hpp"

namespace segsynth::testing {

/// Standard normal draws from SplitMix64 via Box-Muller, so generated data
/// does not depend on the standard library's distributions.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : rng_(seed) {}
  double next();
  SplitMix64& rng() { return rng_; }

 private:
  SplitMix64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Matrix random_normal(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// A scene with one axis-aligned square object on a plain background.
/// Square bounds are in latent (64 x 64) pixels, half-open.
struct SquareScene {
  std::string image_id = "square";
  std::string prompt = "a photo of a dog";
  int image_size = 128;
  int square_x0 = 16, square_y0 = 16, square_x1 = 48, square_y1 = 48;
  int object_class = 12;  // dog
  std::vector<int> distractor_classes;  // present tokens that never attend to anything
  std::vector<std::pair<int, int>> layers = {{64, 2}};  // (resolution, heads)
  int feature_dim = 8;
  int cross_resolution = 64;
  Rgb object_color{200, 60, 40};
  Rgb background_color{40, 90, 200};
  int color_jitter = 6;
  std::uint64_t seed = 1;
};

/// Builds the bundle contents (tensors, image, manifest) without touching disk.
struct BundleContents {
  BundleManifest manifest;
  std::vector<Tensor> self_attention;
  Tensor cross_attention;
  RgbImage image;
};

BundleContents make_square_bundle(const SquareScene& scene);
void write_square_bundle(const std::filesystem::path& dir, const SquareScene& scene);
AttentionBundle load_in_memory(const BundleContents& contents);

/// Ground-truth mask of the scene at width x height (object class inside
/// the square, background elsewhere).
SegMask analytic_mask(const SquareScene& scene, int width, int height);

/// The five scenes committed under tests/data/bundles.
std::vector<SquareScene> committed_scenes();

/// The end-to-end scene committed under tests/data/e2e.
SquareScene e2e_scene();

}  // namespace segsynth::testing
