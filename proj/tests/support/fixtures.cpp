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

#include "fixtures.hpp"

#include <cmath>
#include <numbers>

#include "segsynth/png_io.hpp"

namespace segsynth::testing {

double NormalSource::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = rng_.uniform();
  while (u1 <= 0.0) u1 = rng_.uniform();
  const double u2 = rng_.uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  spare_ = radius * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return radius * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix random_normal(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  NormalSource normal(seed);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = normal.next();
  return m;
}

namespace {

bool inside(const SquareScene& s, double lx, double ly) {
  return lx >= s.square_x0 && lx < s.square_x1 && ly >= s.square_y0 && ly < s.square_y1;
}

std::uint8_t clamp_channel(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

}  // namespace

BundleContents make_square_bundle(const SquareScene& s) {
  NormalSource normal(s.seed);
  BundleContents b;
  BundleManifest& m = b.manifest;
  m.image_id = s.image_id;
  m.prompt = s.prompt;
  m.image_file = "image.png";
  m.image_width = s.image_size;
  m.image_height = s.image_size;

  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    const auto [res, heads] = s.layers[l];
    LayerSpec spec{"up_" + std::to_string(l) + "_r" + std::to_string(res), res, heads,
                   s.feature_dim, "self_attn_" + std::to_string(l) + ".atsb"};
    m.self_attention_layers.push_back(spec);

    Tensor t;
    t.shape = {static_cast<std::uint32_t>(heads), static_cast<std::uint32_t>(res * res),
               static_cast<std::uint32_t>(s.feature_dim)};
    t.values.resize(t.element_count());
    const double scale = static_cast<double>(kLatentResolution) / res;
    for (int h = 0; h < heads; ++h) {
      // Object and background vectors plus a smooth drift along one more
      // direction; the first head of every layer has no drift.
      std::vector<double> a(s.feature_dim), bg(s.feature_dim), drift(s.feature_dim);
      for (int d = 0; d < s.feature_dim; ++d) {
        a[d] = 2.0 * normal.next();
        bg[d] = 2.0 * normal.next();
        drift[d] = 0.3 * normal.next();
      }
      const double drift_gain = h == 0 ? 0.0 : 1.0;
      for (int y = 0; y < res; ++y) {
        for (int x = 0; x < res; ++x) {
          const double lx = (x + 0.5) * scale, ly = (y + 0.5) * scale;
          const auto& base = inside(s, lx, ly) ? a : bg;
          const double g = drift_gain * std::sin(3.0 * x / res + 2.0 * y / res);
          float* dst = t.values.data() +
                       (static_cast<std::size_t>(h) * res * res + static_cast<std::size_t>(y) * res + x) *
                           s.feature_dim;
          for (int d = 0; d < s.feature_dim; ++d) dst[d] = static_cast<float>(base[d] + g * drift[d]);
        }
      }
    }
    b.self_attention.push_back(std::move(t));
  }

  // Cross-attention: object token matches the square, SoT matches the rest,
  // distractor tokens are faint noise.
  CrossAttentionSpec& cross = m.cross_attention;
  cross.resolution = s.cross_resolution;
  cross.tensor_file = "cross_attn.atsb";
  const auto& catalog = ClassCatalog::voc();
  cross.tokens.push_back({"<|startoftext|>", 0, true});
  cross.tokens.push_back({catalog.ovam_tokens[s.object_class], s.object_class, false});
  for (int c : s.distractor_classes) cross.tokens.push_back({catalog.ovam_tokens[c], c, false});

  const int cr = s.cross_resolution;
  const std::size_t plane = static_cast<std::size_t>(cr) * cr;
  b.cross_attention.shape = {static_cast<std::uint32_t>(cross.tokens.size()),
                             static_cast<std::uint32_t>(cr), static_cast<std::uint32_t>(cr)};
  b.cross_attention.values.assign(cross.tokens.size() * plane, 0.0f);
  const double cscale = static_cast<double>(kLatentResolution) / cr;
  for (int y = 0; y < cr; ++y) {
    for (int x = 0; x < cr; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * cr + x;
      const bool in = inside(s, (x + 0.5) * cscale, (y + 0.5) * cscale);
      b.cross_attention.values[p] = in ? 0.05f : 0.9f;
      b.cross_attention.values[plane + p] = in ? 0.8f : 0.02f;
      for (std::size_t t = 2; t < cross.tokens.size(); ++t) {
        b.cross_attention.values[t * plane + p] = static_cast<float>(0.01 * normal.rng().uniform());
      }
    }
  }

  b.image = RgbImage(s.image_size, s.image_size);
  const double iscale = static_cast<double>(kLatentResolution) / s.image_size;
  for (int y = 0; y < s.image_size; ++y) {
    for (int x = 0; x < s.image_size; ++x) {
      const Rgb c = inside(s, (x + 0.5) * iscale, (y + 0.5) * iscale) ? s.object_color
                                                                        : s.background_color;
      const std::size_t p = (static_cast<std::size_t>(y) * s.image_size + x) * 3;
      const int span = 2 * s.color_jitter + 1;
      auto jitter = [&] {
        return s.color_jitter == 0 ? 0
                                   : static_cast<int>(normal.rng().below(span)) - s.color_jitter;
      };
      b.image.pixels[p] = clamp_channel(c.r + jitter());
      b.image.pixels[p + 1] = clamp_channel(c.g + jitter());
      b.image.pixels[p + 2] = clamp_channel(c.b + jitter());
    }
  }
  return b;
}

void write_square_bundle(const std::filesystem::path& dir, const SquareScene& scene) {
  const BundleContents b = make_square_bundle(scene);
  write_bundle(dir, b.manifest, b.self_attention, b.cross_attention, b.image);
}

AttentionBundle load_in_memory(const BundleContents& contents) {
  AttentionBundle bundle;
  bundle.manifest = contents.manifest;
  bundle.self_attention = contents.self_attention;
  bundle.cross_attention = contents.cross_attention;
  bundle.image = contents.image;
  return bundle;
}

SegMask analytic_mask(const SquareScene& s, int width, int height) {
  SegMask mask(width, height, kBackgroundId);
  const double sx = static_cast<double>(kLatentResolution) / width;
  const double sy = static_cast<double>(kLatentResolution) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (inside(s, (x + 0.5) * sx, (y + 0.5) * sy)) {
        mask.at(x, y) = static_cast<std::uint8_t>(s.object_class);
      }
    }
  }
  return mask;
}

std::vector<SquareScene> committed_scenes() {
  std::vector<SquareScene> scenes(5);
  scenes[0].image_id = "img_000_dog";
  scenes[0].layers = {{16, 2}, {32, 2}};
  scenes[0].seed = 11;

  scenes[1].image_id = "img_001_cat";
  scenes[1].prompt = "a cat sitting on a sofa";
  scenes[1].object_class = 8;
  scenes[1].distractor_classes = {18};
  scenes[1].square_x0 = 8;
  scenes[1].square_x1 = 40;
  scenes[1].square_y0 = 20;
  scenes[1].square_y1 = 56;
  scenes[1].layers = {{16, 2}, {32, 3}};
  scenes[1].object_color = {230, 200, 60};
  scenes[1].seed = 12;

  scenes[2].image_id = "img_002_plant";
  scenes[2].prompt = "a potted plant next to a window";
  scenes[2].object_class = 16;
  scenes[2].square_x0 = 24;
  scenes[2].square_x1 = 56;
  scenes[2].square_y0 = 8;
  scenes[2].square_y1 = 32;
  scenes[2].layers = {{32, 2}, {64, 1}};
  scenes[2].cross_resolution = 32;
  scenes[2].object_color = {40, 160, 60};
  scenes[2].background_color = {220, 220, 220};
  scenes[2].seed = 13;

  scenes[3].image_id = "img_003_airplane";
  scenes[3].prompt = "an aeroplane in the sky";
  scenes[3].object_class = 1;
  scenes[3].square_x0 = 12;
  scenes[3].square_x1 = 52;
  scenes[3].square_y0 = 28;
  scenes[3].square_y1 = 44;
  scenes[3].layers = {{16, 1}, {32, 2}, {64, 1}};
  scenes[3].object_color = {180, 180, 190};
  scenes[3].background_color = {70, 130, 230};
  scenes[3].seed = 14;

  scenes[4].image_id = "img_004_monitor";
  scenes[4].prompt = "a tv monitor on a dining table";
  scenes[4].object_class = 20;
  scenes[4].distractor_classes = {11};
  scenes[4].square_x0 = 20;
  scenes[4].square_x1 = 44;
  scenes[4].square_y0 = 20;
  scenes[4].square_y1 = 44;
  scenes[4].layers = {{16, 2}, {32, 2}};
  scenes[4].feature_dim = 16;
  scenes[4].image_size = 96;
  scenes[4].object_color = {20, 20, 20};
  scenes[4].background_color = {150, 110, 70};
  scenes[4].seed = 15;
  return scenes;
}

SquareScene e2e_scene() {
  SquareScene s;
  s.image_id = "e2e_dog";
  s.layers = {{64, 2}};
  s.seed = 7;
  return s;
}

}  // namespace segsynth::testing
