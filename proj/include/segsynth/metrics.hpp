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
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "segsynth/types.hpp"

namespace segsynth {

/// How a predicted 255 against a valid ground-truth pixel is scored.
/// kFalseNegative: the prediction abstains; the pixel only costs recall of
/// its ground-truth class. kAsBackground: the pixel counts as a background
/// prediction.
enum class AbstainPolicy { kFalseNegative, kAsBackground };

/// Rows are ground truth, columns are predictions.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};
  std::array<std::uint64_t, kNumClasses> abstained{};  // predicted 255, per GT class
  std::uint64_t ignored = 0;                           // GT 255 pixels

  std::uint64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix accumulate(ConfusionMatrix conf, const SegMask& pred, const SegMask& gt,
                           AbstainPolicy policy = AbstainPolicy::kFalseNegative);

/// Percent values; nullopt marks a class that is undefined for the metric.
using ClassScores = std::array<std::optional<double>, kNumClasses>;

/// 100 * TP / (TP + FP + FN); undefined when the class never occurs in
/// either ground truth or prediction.
ClassScores per_class_iou(const ConfusionMatrix& conf);

/// 100 * TP / (TP + FN), i.e. recall; undefined when absent from ground truth.
ClassScores per_class_accuracy(const ConfusionMatrix& conf);

/// Mean over defined entries. Throws NoDefinedClasses if there are none.
double miou(std::span<const std::optional<double>> per_class);

double round_to(double value, int decimals);

struct EvalReport {
  ClassScores iou;
  ClassScores accuracy;
  double miou = 0.0;
  std::uint64_t ignored_pixels = 0;
  std::size_t images = 0;

  /// {per_class: {name: {iou, acc}}, miou, ignored_pixels, images, ...}
  std::string to_json() const;
  /// Class | IoU | Acc table with an mIoU footer.
  std::string to_table() const;
};

EvalReport make_report(const ConfusionMatrix& conf, std::size_t images);

/// Evaluates every ground-truth PNG in gt_dir against the same file name in
/// pred_dir.
EvalReport evaluate_dirs(const std::filesystem::path& pred_dir,
                         const std::filesystem::path& gt_dir,
                         AbstainPolicy policy = AbstainPolicy::kFalseNegative);

}  // namespace segsynth
