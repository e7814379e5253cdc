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

#include "segsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "segsynth/catalog.hpp"
#include "segsynth/error.hpp"
#include "segsynth/png_io.hpp"

namespace segsynth {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = ignored;
  for (int g = 0; g < kNumClasses; ++g) {
    for (int p = 0; p < kNumClasses; ++p) sum += counts[g][p];
    sum += abstained[g];
  }
  return sum;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (int g = 0; g < kNumClasses; ++g) {
    for (int p = 0; p < kNumClasses; ++p) counts[g][p] += other.counts[g][p];
    abstained[g] += other.abstained[g];
  }
  ignored += other.ignored;
  return *this;
}

ConfusionMatrix accumulate(ConfusionMatrix conf, const SegMask& pred, const SegMask& gt,
                           AbstainPolicy policy) {
  if (pred.width != gt.width || pred.height != gt.height ||
      pred.labels.size() != gt.labels.size()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and ground truth differ in size");
  }
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const auto g = gt.labels[i];
    const auto p = pred.labels[i];
    if (!is_valid_label(g) || !is_valid_label(p)) {
      throw Error(ErrorCode::InvalidLabel, "label outside {0..20, 255}");
    }
    if (g == kIgnoreId) {
      ++conf.ignored;
    } else if (p == kIgnoreId) {
      if (policy == AbstainPolicy::kAsBackground) {
        ++conf.counts[g][kBackgroundId];
      } else {
        ++conf.abstained[g];
      }
    } else {
      ++conf.counts[g][p];
    }
  }
  return conf;
}

ClassScores per_class_iou(const ConfusionMatrix& conf) {
  ClassScores out;
  for (int c = 0; c < kNumClasses; ++c) {
    const std::uint64_t tp = conf.counts[c][c];
    std::uint64_t fn = conf.abstained[c], fp = 0;
    for (int o = 0; o < kNumClasses; ++o) {
      if (o == c) continue;
      fn += conf.counts[c][o];
      fp += conf.counts[o][c];
    }
    const std::uint64_t uni = tp + fp + fn;
    if (uni > 0) out[c] = 100.0 * static_cast<double>(tp) / static_cast<double>(uni);
  }
  return out;
}

ClassScores per_class_accuracy(const ConfusionMatrix& conf) {
  ClassScores out;
  for (int c = 0; c < kNumClasses; ++c) {
    std::uint64_t row = conf.abstained[c];
    for (int o = 0; o < kNumClasses; ++o) row += conf.counts[c][o];
    if (row > 0) out[c] = 100.0 * static_cast<double>(conf.counts[c][c]) / static_cast<double>(row);
  }
  return out;
}

double miou(std::span<const std::optional<double>> per_class) {
  double sum = 0.0;
  std::size_t defined = 0;
  for (const auto& v : per_class) {
    if (!v) continue;
    sum += *v;
    ++defined;
  }
  if (defined == 0) throw Error(ErrorCode::NoDefinedClasses, "no class has a defined IoU");
  return sum / static_cast<double>(defined);
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

EvalReport make_report(const ConfusionMatrix& conf, std::size_t images) {
  EvalReport r;
  r.iou = per_class_iou(conf);
  r.accuracy = per_class_accuracy(conf);
  r.miou = miou(r.iou);
  r.ignored_pixels = conf.ignored;
  r.images = images;
  return r;
}

std::string EvalReport::to_json() const {
  using nlohmann::json;
  const auto& catalog = ClassCatalog::voc();
  json per_class = json::object();
  auto value = [](const std::optional<double>& v) -> json {
    return v ? json(round_to(*v, 2)) : json(nullptr);
  };
  for (int c = 0; c < kNumClasses; ++c) {
    per_class[catalog.names[c]] = {{"iou", value(iou[c])}, {"acc", value(accuracy[c])}};
  }
  json doc = {{"per_class", per_class},
              {"miou", round_to(miou, 2)},
              {"ignored_pixels", ignored_pixels},
              {"images", images},
              {"accuracy_definition", "per-class recall: TP / (TP + FN)"}};
  return doc.dump(2) + "\n";
}

std::string EvalReport::to_table() const {
  const auto& catalog = ClassCatalog::voc();
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  auto cell = [&](const std::optional<double>& v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2);
    if (v) {
      s << *v;
    } else {
      s << "-";
    }
    return s.str();
  };
  out << std::left << std::setw(12) << "Class" << " | " << std::right << std::setw(6) << "IoU"
      << " | " << std::setw(6) << "Acc" << "\n";
  out << std::string(30, '-') << "\n";
  for (int c = 0; c < kNumClasses; ++c) {
    out << std::left << std::setw(12) << catalog.names[c] << " | " << std::right << std::setw(6)
        << cell(iou[c]) << " | " << std::setw(6) << cell(accuracy[c]) << "\n";
  }
  out << std::string(30, '-') << "\n";
  out << std::left << std::setw(12) << "mIoU" << " | " << std::right << std::setw(6) << miou
      << "\n";
  return out.str();
}

EvalReport evaluate_dirs(const std::filesystem::path& pred_dir,
                         const std::filesystem::path& gt_dir, AbstainPolicy policy) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(gt_dir)) throw Error(ErrorCode::MissingInput, "no directory " + gt_dir.string());
  if (!fs::is_directory(pred_dir)) {
    throw Error(ErrorCode::MissingInput, "no directory " + pred_dir.string());
  }
  std::vector<fs::path> gt_files;
  for (const auto& entry : fs::directory_iterator(gt_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      gt_files.push_back(entry.path());
    }
  }
  std::sort(gt_files.begin(), gt_files.end());
  if (gt_files.empty()) throw Error(ErrorCode::EmptyInput, "no PNG masks in " + gt_dir.string());

  ConfusionMatrix conf;
  for (const auto& gt_path : gt_files) {
    const auto pred_path = pred_dir / gt_path.filename();
    if (!fs::is_regular_file(pred_path)) {
      throw Error(ErrorCode::MissingInput, "no prediction for " + gt_path.filename().string());
    }
    conf = accumulate(std::move(conf), read_mask_png(pred_path), read_mask_png(gt_path), policy);
  }
  return make_report(conf, gt_files.size());
}

}  // namespace segsynth
