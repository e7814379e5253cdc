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
#include <span>
#include <vector>

#include "segsynth/catalog.hpp"
#include "segsynth/types.hpp"

namespace segsynth {

// Masks are stored as 8-bit palette-indexed PNGs: the stored index is the
// class id and the PLTE chunk carries the catalog palette.
std::vector<std::uint8_t> encode_mask_png(const SegMask& mask, const ClassCatalog& catalog);
void write_mask_png(const std::filesystem::path& path, const SegMask& mask,
                    const ClassCatalog& catalog = ClassCatalog::voc());

// Accepts palette-indexed or 8-bit grayscale PNGs and returns the raw
// indices. Labels outside {0..20, 255} are rejected with InvalidLabel.
SegMask decode_mask_png(std::span<const std::uint8_t> bytes);
SegMask read_mask_png(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);

// Any PNG colour type is converted to 8-bit RGB (alpha dropped).
RgbImage decode_rgb_png(std::span<const std::uint8_t> bytes);
RgbImage read_rgb_png(const std::filesystem::path& path);

}  // namespace segsynth
