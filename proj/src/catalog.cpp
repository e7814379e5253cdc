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

#include "segsynth/catalog.hpp"

namespace segsynth {

Palette voc_palette() {
  Palette palette{};
  for (int i = 0; i < 256; ++i) {
    int r = 0, g = 0, b = 0;
    int c = i;
    for (int j = 0; j < 8; ++j) {
      r |= ((c >> 0) & 1) << (7 - j);
      g |= ((c >> 1) & 1) << (7 - j);
      b |= ((c >> 2) & 1) << (7 - j);
      c >>= 3;
    }
    palette[i] = Rgb{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                     static_cast<std::uint8_t>(b)};
  }
  return palette;
}

namespace {

ClassCatalog build_voc() {
  ClassCatalog catalog;
  catalog.names = {"background", "aeroplane",   "bicycle", "bird",  "boat",
                   "bottle",     "bus",         "car",     "cat",   "chair",
                   "cow",        "diningtable", "dog",     "horse", "motorbike",
                   "person",     "pottedplant", "sheep",   "sofa",  "train",
                   "tvmonitor"};
  catalog.ovam_tokens = catalog.names;
  catalog.ovam_tokens[1] = "airplane";
  catalog.ovam_tokens[11] = "table";
  catalog.ovam_tokens[16] = "pot plant";
  catalog.ovam_tokens[20] = "monitor";
  catalog.palette = voc_palette();
  return catalog;
}

}  // namespace

const ClassCatalog& ClassCatalog::voc() {
  static const ClassCatalog catalog = build_voc();
  return catalog;
}

std::optional<int> ClassCatalog::id_of(std::string_view name) const {
  for (int i = 0; i < kNumClasses; ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<int> ClassCatalog::id_of_token(std::string_view token) const {
  for (int i = 0; i < kNumClasses; ++i) {
    if (ovam_tokens[i] == token) return i;
  }
  return std::nullopt;
}

}  // namespace segsynth
