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
#include <span>
#include <vector>

namespace segsynth {

inline constexpr int kNumClasses = 21;
inline constexpr std::uint8_t kBackgroundId = 0;
inline constexpr std::uint8_t kIgnoreId = 255;
inline constexpr int kLatentResolution = 64;

/// Dense row-major matrix of doubles. Rows are samples (pixels), columns
/// are features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Per-pixel class labels, row-major (y outer, x inner). Valid labels are
/// 0..20 and kIgnoreId.
struct SegMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;

  SegMask() = default;
  SegMask(int w, int h, std::uint8_t fill = kBackgroundId)
      : width(w), height(h), labels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const SegMask&, const SegMask&) = default;
};

inline bool is_valid_label(std::uint8_t v) { return v < kNumClasses || v == kIgnoreId; }

/// 8-bit interleaved RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // size = 3 * width * height

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

}  // namespace segsynth
