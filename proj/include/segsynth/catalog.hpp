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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "segsynth/types.hpp"

namespace segsynth {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

using Palette = std::array<Rgb, 256>;

/// Standard Pascal VOC palette: the bits of the label index are spread over
/// the high bits of the three channels, three bits per round.
Palette voc_palette();

/// The 21 VOC classes with the token text used to query cross-attention.
/// Four classes are queried under a more expressive name (diningtable ->
/// "table", tvmonitor -> "monitor", pottedplant -> "pot plant",
/// aeroplane -> "airplane").
struct ClassCatalog {
  std::array<std::string, kNumClasses> names;
  std::array<std::string, kNumClasses> ovam_tokens;
  std::uint8_t ignore_id = kIgnoreId;
  Palette palette;

  static const ClassCatalog& voc();

  std::optional<int> id_of(std::string_view name) const;
  std::optional<int> id_of_token(std::string_view token) const;
};

}  // namespace segsynth
