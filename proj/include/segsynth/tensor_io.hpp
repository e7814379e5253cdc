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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace segsynth {

// ATSB tensor container, all fields little-endian:
//   "ATSB" | u16 version (=1) | u8 dtype (0 = f32) | u8 ndim (1..4)
//   | ndim x u32 shape | row-major f32 payload
inline constexpr std::uint16_t kAtsbVersion = 1;
inline constexpr std::uint8_t kAtsbDtypeF32 = 0;

struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> values;

  std::size_t element_count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::vector<std::uint8_t> encode_tensor(std::span<const std::uint32_t> shape,
                                        std::span<const float> values);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, std::span<const std::uint32_t> shape,
                  std::span<const float> values);
inline void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_tensor(path, t.shape, t.values);
}

// Whole-file helpers shared by the readers.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace segsynth
