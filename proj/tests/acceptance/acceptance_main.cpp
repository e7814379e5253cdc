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

// Acceptance gate: one PASS/FAIL line per primary criterion. Exits non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "reference_scores.hpp"
#include "segsynth/classify.hpp"
#include "segsynth/cluster.hpp"
#include "segsynth/condense.hpp"
#include "segsynth/metrics.hpp"
#include "segsynth/pipeline.hpp"
#include "segsynth/png_io.hpp"
#include "segsynth/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace segsynth;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later checks still run so the detail is useful.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && out_.pass) {
      out_.pass = false;
      out_.detail = what;
    }
  }
  void note(const std::string& s) {
    if (out_.pass) out_.detail = s;
  }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Outcome metrics_against_reference() {
  Check c;
  double got[2];
  int i = 0;
  for (const auto* col : {&testing::kSyntheticTestSet, &testing::kVocValidation}) {
    ClassScores s;
    for (int k = 0; k < kNumClasses; ++k) s[k] = col->iou[k];
    got[i] = miou(s);
    c.expect(std::abs(got[i] - col->miou) <= 0.01,
             fmt("mIoU %.4f vs reference %.2f", got[i], col->miou));
    ++i;
  }
  c.note(fmt("synthetic set %.4f, VOC %.4f", got[0], got[1]));
  return c.result();
}

Outcome pca_against_oracle() {
  Check c;
  double worst_angle = 0.0, worst_rel = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testing::random_normal(100, 10, 1000 + trial);
    const PcaModel m = pca_fit(x);
    const testing::EigenPca ref = testing::eigen_pca(x);
    Eigen::MatrixXd mine(10, 3);
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < 10; ++j) mine(j, k) = m.components(k, j);
    }
    worst_angle =
        std::max(worst_angle, testing::max_principal_angle_sine(mine, ref.vectors.leftCols(3)));
    for (int k = 0; k < 3; ++k) {
      worst_rel = std::max(worst_rel,
                           std::abs(m.explained_variance[k] - ref.values(k)) / ref.values(k));
    }
  }
  c.expect(worst_angle < 1e-6, fmt("principal angle sine %.3g", worst_angle));
  c.expect(worst_rel < 1e-8, fmt("variance relative error %.3g", worst_rel));
  c.note(fmt("max angle sine %.3g, max variance rel. error %.3g", worst_angle, worst_rel));
  return c.result();
}

Outcome kmeans_determinism_and_optimality() {
  Check c;
  const Matrix pts = testing::random_normal(4096, 12, 77);
  KMeansOptions base;
  const KMeansResult ref = kmeans_fit(pts, 10, 5, base, 64, 64);
  for (int threads : {1, 4, 8}) {
    KMeansOptions o;
    o.threads = threads;
    const KMeansResult r = kmeans_fit(pts, 10, 5, o, 64, 64);
    c.expect(r.labeling.labels == ref.labeling.labels && r.centroids == ref.centroids,
             "labels differ at " + std::to_string(threads) + " threads");
  }

  // 40 points in two far-apart blobs.
  Matrix blobs = testing::random_normal(40, 2, 9);
  for (std::size_t i = 20; i < 40; ++i) blobs(i, 0) += 50.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = kmeans_fit(blobs, 2, seed);
    bool ok = true;
    for (std::size_t i = 0; i < 40; ++i) {
      ok = ok && r.labeling.labels[i] == r.labeling.labels[i < 20 ? 0 : 20];
    }
    ok = ok && r.labeling.labels[0] != r.labeling.labels[20];
    c.expect(ok, "blob partition wrong for seed " + std::to_string(seed));
  }

  int optimal = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testing::random_normal(8, 2, 300 + trial);
    const auto r = kmeans_fit(x, 2, trial);
    const double best = testing::brute_force_two_means(x);
    c.expect(*r.labeling.inertia >= best - 1e-9, "inertia below the exhaustive optimum");
    if (*r.labeling.inertia <= best + 1e-9) ++optimal;
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      c.expect(r.inertia_history[i] <= r.inertia_history[i - 1] * (1 + 1e-12),
               "inertia increased");
    }
  }
  c.note("threads 1/4/8 identical; blobs recovered; " + std::to_string(optimal) +
         "/20 random instances at the exhaustive optimum");
  return c.result();
}

Outcome components_against_bfs() {
  Check c;
  std::mt19937_64 gen(12345);
  for (int trial = 0; trial < 100; ++trial) {
    ClusterLabeling l;
    l.height = l.width = 32;
    const int k = 2 + trial % 5;
    l.labels.resize(32 * 32);
    for (auto& v : l.labels) v = static_cast<std::int32_t>(gen() % k);
    l.n_clusters = k;
    int n = 0;
    const auto oracle = testing::bfs_components(l.labels, 32, 32, &n);
    const auto s = split_components(l);
    c.expect(s.labels == oracle && s.n_clusters == n,
             "mismatch on labeling " + std::to_string(trial));
  }
  c.note("100 random 32x32 labelings identical to BFS");
  return c.result();
}

Outcome vote_semantics() {
  Check c;
  const std::uint8_t labels[3] = {0, 12, 15};
  int cases = 0;
  for (int a = 0; a <= 9; ++a) {
    for (int b = 0; a + b <= 9; ++b) {
      const int counts[3] = {a, b, 9 - a - b};
      VoteStack s;
      s.height = s.width = 1;
      for (int l = 0; l < 3; ++l) {
        for (int i = 0; i < counts[l]; ++i) s.votes.push_back({labels[l]});
      }
      std::uint8_t expected = kIgnoreId;
      for (int l = 0; l < 3; ++l) {
        if (counts[l] >= 5) expected = labels[l];
      }
      const auto got = aggregate_votes(s).labels[0];
      std::reverse(s.votes.begin(), s.votes.end());
      const auto got_reversed = aggregate_votes(s).labels[0];
      c.expect(got == expected && got_reversed == expected,
               "counts " + std::to_string(a) + "/" + std::to_string(b));
      ++cases;
    }
  }
  c.note(std::to_string(cases) + " multisets checked");
  return c.result();
}

Outcome end_to_end_fixture() {
  Check c;
  const auto scene = testing::e2e_scene();
  const AttentionBundle bundle =
      read_bundle(fs::path(SEGSYNTH_FIXTURE_DIR) / "e2e" / scene.image_id);
  const SegmentationResult r = segment_bundle(bundle, PipelineConfig{});
  const SegMask truth = testing::analytic_mask(scene, r.mask.width, r.mask.height);
  std::size_t agree = 0, uncertain = 0, wrong = 0;
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    if (r.mask.labels[i] == truth.labels[i]) {
      ++agree;
    } else if (r.mask.labels[i] == kIgnoreId) {
      ++uncertain;
    } else {
      ++wrong;
    }
  }
  const double share = 100.0 * agree / truth.labels.size();
  c.expect(share >= 99.0, fmt("agreement %.3f%%", share));
  c.expect(wrong == 0, std::to_string(wrong) + " pixels carry a wrong class");
  c.note(fmt("agreement %.3f%%, ", share) + std::to_string(uncertain) + " uncertain, " +
         std::to_string(wrong) + " wrong");
  return c.result();
}

Outcome format_round_trips() {
  Check c;
  SplitMix64 rng(2718);
  for (int i = 0; i < 1000; ++i) {
    Tensor t;
    const int ndim = 1 + static_cast<int>(rng.below(4));
    std::size_t count = 1;
    for (int d = 0; d < ndim; ++d) {
      t.shape.push_back(1 + static_cast<std::uint32_t>(rng.below(6)));
      count *= t.shape.back();
    }
    for (std::size_t j = 0; j < count; ++j) {
      const std::uint64_t bits = rng.next();
      float f;
      std::uint32_t b = static_cast<std::uint32_t>(bits);
      std::memcpy(&f, &b, sizeof f);
      if (!std::isfinite(f)) f = static_cast<float>(bits % 1000) * 0.5f;
      t.values.push_back(f);
    }
    const auto bytes = encode_tensor(t.shape, t.values);
    const Tensor back = decode_tensor(bytes);
    c.expect(encode_tensor(back.shape, back.values) == bytes && back.shape == t.shape,
             "ATSB case " + std::to_string(i));

    SegMask m(1 + static_cast<int>(rng.below(40)), 1 + static_cast<int>(rng.below(40)));
    for (auto& v : m.labels) {
      const auto x = rng.below(22);
      v = static_cast<std::uint8_t>(x == 21 ? kIgnoreId : x);
    }
    c.expect(decode_mask_png(encode_mask_png(m, ClassCatalog::voc())) == m, "PNG case " + std::to_string(i));
  }
  c.note("1000 ATSB tensors and 1000 palette masks round-tripped");
  return c.result();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome pipeline_determinism() {
  Check c;
  const fs::path src = fs::path(SEGSYNTH_FIXTURE_DIR) / "bundles";
  const fs::path tmp = fs::temp_directory_path() /
                       ("segsynth_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(tmp);

  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(src)) names.push_back(e.path().filename());
  std::sort(names.begin(), names.end());

  // Same bundles copied in reverse order under new directory names.
  fs::create_directories(tmp / "renamed");
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto& n = names[names.size() - 1 - i];
    fs::copy(src / n, tmp / "renamed" / ("b" + std::to_string(i)), fs::copy_options::recursive);
  }

  const auto run = [&](const fs::path& in, const std::string& out, int workers) {
    PipelineConfig cfg;
    cfg.io.bundle_dir = in;
    cfg.io.out_dir = tmp / out;
    cfg.workers = workers;
    cfg.seed = 11;
    return run_pipeline(cfg);
  };
  const auto a = run(src, "w1", 1);
  const auto b = run(src, "w4", 4);
  const auto d = run(tmp / "renamed", "renamed_out", 2);
  c.expect(a.status == ExitStatus::kSuccess && a.manifest.images.size() == names.size(),
           "pipeline did not segment every fixture bundle");

  const auto manifest = [&](const std::string& out) {
    auto doc = nlohmann::json::parse(slurp(tmp / out / "manifest.json"));
    doc.erase("wall_time_seconds");
    return doc;
  };
  c.expect(manifest("w1") == manifest("w4"), "manifests differ between 1 and 4 workers");
  auto m1 = manifest("w1"), m3 = manifest("renamed_out");
  for (auto* m : {&m1, &m3}) {
    for (auto& img : (*m)["images"]) img.erase("image_file");
  }
  c.expect(m1 == m3, "manifests differ after reordering bundle directories");

  std::size_t masks = 0;
  for (const auto& entry : a.manifest.images) {
    const auto mask = slurp(tmp / "w1" / entry.mask_file);
    c.expect(mask == slurp(tmp / "w4" / entry.mask_file), entry.mask_file + " differs (workers)");
    c.expect(mask == slurp(tmp / "renamed_out" / entry.mask_file),
             entry.mask_file + " differs (ordering)");
    ++masks;
  }
  (void)d;
  fs::remove_all(tmp);
  c.note(std::to_string(masks) + " masks byte-identical across workers 1/4 and reordering");
  return c.result();
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"metrics_vs_reference_scores", metrics_against_reference},
      {"pca_vs_eigendecomposition_oracle", pca_against_oracle},
      {"kmeans_determinism_and_optimality", kmeans_determinism_and_optimality},
      {"connected_components_vs_bfs", components_against_bfs},
      {"vote_strict_majority", vote_semantics},
      {"end_to_end_square_fixture", end_to_end_fixture},
      {"format_round_trips", format_round_trips},
      {"pipeline_determinism", pipeline_determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s (%.2fs): %s\n", o.pass ? "PASS" : "FAIL", name, secs, o.detail.c_str());
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures,
              std::size(criteria));
  return failures == 0 ? 0 : 1;
}
