// Copyright 2026 The vloc Authors
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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "vloc/benchmark.hpp"
#include "vloc/errors.hpp"
#include "vloc/eval.hpp"
#include "vloc/losses.hpp"
#include "vloc/rng.hpp"

using namespace vloc;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", index,
              name, detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

// ---------------------------------------------------------------------------
// 1. Noiseless closed loop: 100 frames, 500 stable landmarks, priors within
//    +-1.0 m / +-2.0 deg; RMS horizontal <= 0.025 m, RMS yaw <= 0.05 deg,
//    0% unavailable, <= 100 ms/frame.
void criterion_noiseless_loop() {
  BenchmarkOptions options;
  options.world.landmark_count = 500;
  options.world.trajectory_frames = 100;
  options.world.stable_fraction = 1.0;
  options.world.seed = 20260810;
  options.noise_sigma = 0.0;
  options.drop_rate = 0.0;
  options.prior_max_xy = 1.0;
  options.prior_max_psi = 2.0 * M_PI / 180.0;
  options.run_seed = 1;

  const BenchmarkRun run = run_closed_loop(options);
  const MetricsSummary s = summarize(run.records);
  const bool pass = s.has_metrics && s.rms_horizontal <= 0.025 &&
                    s.rms_yaw_deg <= 0.05 && s.na_percent == 0.0 &&
                    run.mean_frame_ms <= 100.0;
  report(1, "noiseless closed loop", pass,
         fmt("RMS horizontal %.4f m (<= 0.025), RMS yaw %.4f deg (<= 0.05), "
             "N/A %.1f%% (= 0), %.1f ms/frame (<= 100)",
             s.rms_horizontal, s.rms_yaw_deg, s.na_percent, run.mean_frame_ms));
}

// ---------------------------------------------------------------------------
// 2. Noise robustness: descriptor noise sigma = 0.1, 20% unreliable
//    landmarks with drop_rate 0.5; RMS horizontal <= 0.10 m.
BenchmarkOptions noisy_benchmark(std::uint64_t world_seed,
                                 std::uint64_t run_seed, int frames) {
  BenchmarkOptions options;
  options.world.landmark_count = 1500;
  options.world.trajectory_frames = frames;
  options.world.stable_fraction = 0.8;
  options.world.seed = world_seed;
  options.noise_sigma = 0.1;
  options.drop_rate = 0.5;
  options.prior_max_xy = 1.0;
  options.prior_max_psi = 2.0 * M_PI / 180.0;
  options.run_seed = run_seed;
  return options;
}

void criterion_noise_robustness() {
  const BenchmarkRun run = run_closed_loop(noisy_benchmark(77, 78, 60));
  const MetricsSummary s = summarize(run.records);
  const bool pass = s.has_metrics && s.rms_horizontal <= 0.10;
  report(2, "noise robustness", pass,
         fmt("RMS horizontal %.4f m (<= 0.10), N/A %.1f%%", s.rms_horizontal,
             s.na_percent));
}

// ---------------------------------------------------------------------------
// 3. Ablation ordering: WFPS+Reduce RMS <= FPS+Reduce RMS on >= 8/10 seeds.
void criterion_ablation_ordering() {
  int wins = 0;
  std::string detail;
  for (int seed = 0; seed < 10; ++seed) {
    BenchmarkOptions wfps_run = noisy_benchmark(1000 + seed, 2000 + seed, 25);
    wfps_run.selection = SelectionStrategy::kWfps;
    BenchmarkOptions fps_run = wfps_run;
    fps_run.selection = SelectionStrategy::kFps;

    const MetricsSummary ws = summarize(run_closed_loop(wfps_run).records);
    const MetricsSummary fsm = summarize(run_closed_loop(fps_run).records);
    const bool win =
        ws.has_metrics && fsm.has_metrics && ws.rms_horizontal <= fsm.rms_horizontal;
    if (win) ++wins;
    detail += fmt("%s%.3f/%.3f", seed ? " " : "", ws.rms_horizontal,
                  fsm.rms_horizontal);
  }
  report(3, "ablation ordering (WFPS+Reduce vs FPS+Reduce)", wins >= 8,
         fmt("%d/10 seeds ordered (>= 8); per-seed RMS W/F: %s", wins,
             detail.c_str()));
}

// ---------------------------------------------------------------------------
// 4. FPS/WFPS oracle equivalence on 1000 random instances up to 200
//    candidates; WFPS with uniform weights identical to FPS.
std::vector<int> oracle_greedy(const std::vector<Candidate>& c, int n, int seed,
                               bool weighted) {
  std::vector<int> sel = {seed};
  std::vector<char> taken(c.size(), 0);
  taken[seed] = 1;
  while (static_cast<int>(sel.size()) < n) {
    int best = -1;
    double best_score = -1.0;
    for (int i = 0; i < static_cast<int>(c.size()); ++i) {
      if (taken[i]) continue;
      double min_d = std::numeric_limits<double>::infinity();
      for (int s : sel)
        min_d = std::min(min_d, std::hypot(c[i].u - c[s].u, c[i].v - c[s].v));
      const double score = weighted ? c[i].weight * min_d : min_d;
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    sel.push_back(best);
    taken[best] = 1;
  }
  return sel;
}

void criterion_selection_oracle() {
  std::mt19937_64 rng(40416);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int count = 2 + static_cast<int>(uniform_below(rng, 199));
    std::vector<Candidate> c(count);
    for (auto& cand : c) {
      cand.u = uniform_range(rng, 0.0, 64.0);
      cand.v = uniform_range(rng, 0.0, 64.0);
      cand.weight = uniform_unit(rng);
    }
    const int n = 1 + static_cast<int>(uniform_below(rng, count));
    const int seed = static_cast<int>(uniform_below(rng, count));

    if (fps(c, n, seed) != oracle_greedy(c, n, seed, false)) ++mismatches;
    if (wfps(c, n, seed) != oracle_greedy(c, n, seed, true)) ++mismatches;

    std::vector<Candidate> uniform = c;
    for (auto& cand : uniform) cand.weight = 1.0;
    if (wfps(uniform, n, seed) != fps(uniform, n, seed)) ++mismatches;
  }
  report(4, "FPS/WFPS brute-force equivalence", mismatches == 0,
         fmt("%d mismatches over 1000 instances", mismatches));
}

// ---------------------------------------------------------------------------
// 5. Probability-head invariants over 1000 randomized volumes.
void criterion_probability_head() {
  std::mt19937_64 rng(515);
  double worst_sum = 0.0, worst_shift = 0.0, worst_mode = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    CostVolumeConfig cfg;
    cfg.n_x = 2 * static_cast<int>(uniform_below(rng, 4)) + 3;
    cfg.n_y = 2 * static_cast<int>(uniform_below(rng, 4)) + 3;
    cfg.n_psi = 2 * static_cast<int>(uniform_below(rng, 4)) + 1;
    cfg.step_x = cfg.step_y = uniform_range(rng, 0.05, 0.5);
    cfg.step_psi = uniform_range(rng, 0.005, 0.05);

    const int keypoints = 1 + static_cast<int>(uniform_below(rng, 24));
    CostVolume vol;
    vol.cfg = cfg;
    vol.num_keypoints = keypoints;
    vol.raw.resize(static_cast<std::size_t>(keypoints) * cfg.node_count());
    vol.valid.resize(vol.raw.size());
    for (auto& c : vol.raw) c = uniform_range(rng, 0.0, 3.0);
    for (auto& v : vol.valid) v = uniform_unit(rng) < 0.85 ? 1 : 0;
    for (int p = 0; p < keypoints; ++p)  // keep at least the center valid
      vol.valid[static_cast<std::size_t>(p) * cfg.node_count() +
                cfg.node_count() / 2] = 1;

    // Uniform-weight equivalence of the two marginalization modes.
    const std::vector<float> uniform_w(keypoints, 0.7f);
    const auto reduce =
        marginalize(vol, uniform_w, MarginalizationMode::kReduceAverage);
    const auto weighted =
        marginalize(vol, uniform_w, MarginalizationMode::kWeightedAverage);

    const double temperature = uniform_range(rng, 0.05, 0.5);
    const auto collapse = trial % 2 == 0
                              ? ProbabilityCollapse::kSoftmaxThenSum
                              : ProbabilityCollapse::kAverageThenSoftmax;
    const auto mr = marginal_distributions(reduce, temperature, collapse);
    const auto mw = marginal_distributions(weighted, temperature, collapse);
    worst_mode = std::max({worst_mode, std::abs(mr.x.expected - mw.x.expected),
                           std::abs(mr.y.expected - mw.y.expected),
                           std::abs(mr.psi.expected - mw.psi.expected)});

    for (const AxisDistribution* axis : {&mr.x, &mr.y, &mr.psi}) {
      double sum = 0.0;
      for (double p : axis->probabilities) sum += p;
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }

    // Shift invariance.
    MarginalizedVolume shifted = reduce;
    const double shift = uniform_range(rng, -10.0, 10.0);
    for (auto& c : shifted.cost) c += shift;
    const auto ms = marginal_distributions(shifted, temperature, collapse);
    worst_shift = std::max({worst_shift, std::abs(ms.x.expected - mr.x.expected),
                            std::abs(ms.y.expected - mr.y.expected),
                            std::abs(ms.psi.expected - mr.psi.expected),
                            std::abs(ms.x.variance - mr.x.variance)});
  }
  const bool pass =
      worst_sum <= 1e-6 && worst_shift <= 1e-9 && worst_mode <= 1e-9;
  report(5, "probability-head invariants", pass,
         fmt("max |sum-1| %.2e (<= 1e-6), shift drift %.2e (<= 1e-9), "
             "mode equivalence %.2e (<= 1e-9)",
             worst_sum, worst_shift, worst_mode));
}

// ---------------------------------------------------------------------------
// 6. Loss correctness: zero at ground truth; hand-computed cases of the
//    absolute/concentration/similarity losses and both variants to 1e-12.
void criterion_losses() {
  LossConfig cfg;
  bool pass = true;
  std::string failures;

  auto expect = [&](double got, double want, const char* what) {
    if (std::abs(got - want) > 1e-12) {
      pass = false;
      failures += fmt(" %s: got %.15f want %.15f;", what, got, want);
    }
  };

  const PoseSE2Offset gt(0.4, -0.2, 0.1);
  expect(loss_absolute(gt, gt, cfg), 0.0, "absolute at gt");
  cfg.variant = LossVariant::kSupplement;
  expect(loss_absolute(gt, gt, cfg), 0.0, "supplement at gt");

  const PoseSE2Offset est(0.5, 0.0, 0.15);  // residuals 0.1, 0.2, 0.05
  cfg.variant = LossVariant::kMainPaper;
  expect(loss_absolute(est, gt, cfg), 0.35, "absolute hand case");
  cfg.variant = LossVariant::kSupplement;
  expect(loss_absolute(est, gt, cfg), 0.0525, "supplement hand case");
  cfg.alpha = 2.0;
  expect(loss_absolute(est, gt, cfg), 2.0 * 0.05 + 0.0025,
         "supplement alpha scope");
  cfg.alpha = 1.0;

  // Concentration: delta at gt is exactly zero; uniform symmetric grid
  // equals the mean absolute offset per axis.
  MarginalDistributions delta;
  auto axis = [](std::vector<double> off, std::vector<double> p) {
    AxisDistribution a;
    a.offsets = std::move(off);
    a.probabilities = std::move(p);
    return a;
  };
  delta.x = axis({-0.1, 0.0, 0.1}, {0.0, 1.0, 0.0});
  delta.y = axis({-0.1, 0.0, 0.1}, {0.0, 1.0, 0.0});
  delta.psi = axis({-0.01, 0.0, 0.01}, {0.0, 1.0, 0.0});
  expect(loss_concentration(delta, PoseSE2Offset(0, 0, 0), cfg), 0.0,
         "concentration at gt");

  MarginalDistributions uniform;
  uniform.x = axis({-0.3, 0.0, 0.3}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  uniform.y = axis({-0.5, 0.0, 0.5}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  uniform.psi = axis({-0.06, 0.0, 0.06}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  expect(loss_concentration(uniform, PoseSE2Offset(0, 0, 0), cfg),
         0.2 + 1.0 / 3.0 + 0.04, "concentration uniform grid");

  // Similarity margin.
  expect(loss_similarity(std::vector<double>{0.2, 1.0}, cfg), 0.0,
         "similarity under margin");
  expect(loss_similarity(std::vector<double>{1.5, 0.2}, cfg), 0.5,
         "similarity hand case");
  expect(loss_similarity(std::vector<double>{}, cfg), 0.0, "similarity empty");

  report(6, "loss correctness", pass,
         pass ? "all hand-computed cases within 1e-12" : failures);
}

// ---------------------------------------------------------------------------
// 7. Persistence: bit-exact round trips over 100 randomized databases and
//    pyramids; corrupted files rejected with located errors.
void criterion_persistence() {
  std::mt19937_64 rng(4242);
  const fs::path dir = fs::temp_directory_path();
  const fs::path map_path = dir / "vloc_acceptance.almp";
  const fs::path pyr_path = dir / "vloc_acceptance.alfp";
  int failures = 0;

  for (int round = 0; round < 100; ++round) {
    MapDatabase db;
    const int nodes = 1 + static_cast<int>(uniform_below(rng, 20));
    for (int i = 0; i < nodes; ++i) {
      MapNode node;
      node.node_id = i;
      node.camera_id = static_cast<std::uint16_t>(uniform_below(rng, 3));
      node.capture_pose.position =
          Eigen::Vector3d(uniform_range(rng, -200, 200),
                          uniform_range(rng, -200, 200), 0.0);
      node.capture_pose.orientation =
          yaw_quaternion(uniform_range(rng, -M_PI, M_PI));
      for (auto& kps : node.keypoints_by_level) {
        const int count = 1 + static_cast<int>(uniform_below(rng, 8));
        for (int k = 0; k < count; ++k) {
          MapKeypoint kp;
          kp.u = static_cast<float>(uniform_range(rng, 0, 100));
          kp.v = static_cast<float>(uniform_range(rng, 0, 100));
          kp.weight = static_cast<float>(uniform_unit(rng));
          kp.world = Eigen::Vector3d(uniform_range(rng, -50, 50),
                                     uniform_range(rng, -50, 50),
                                     uniform_range(rng, 0, 10));
          for (int d = 0; d < kDescriptorDim; ++d)
            kp.descriptor[d] = static_cast<float>(gaussian(rng));
          kps.push_back(kp);
        }
      }
      db.add_node(std::move(node));
    }
    save_map(db, map_path);
    const MapDatabase back = load_map(map_path);
    if (back.size() != db.size()) { ++failures; continue; }
    for (std::size_t i = 0; i < db.size(); ++i) {
      const MapNode& a = db.nodes()[i];
      const MapNode& b = back.nodes()[i];
      if (a.node_id != b.node_id ||
          a.capture_pose.position != b.capture_pose.position ||
          a.capture_pose.orientation.coeffs() !=
              b.capture_pose.orientation.coeffs())
        ++failures;
      for (int li = 0; li < 3; ++li) {
        const auto& ka = a.keypoints_by_level[li];
        const auto& kb = b.keypoints_by_level[li];
        if (ka.size() != kb.size()) { ++failures; continue; }
        for (std::size_t k = 0; k < ka.size(); ++k)
          if (ka[k].u != kb[k].u || ka[k].v != kb[k].v ||
              ka[k].weight != kb[k].weight || ka[k].world != kb[k].world ||
              ka[k].descriptor != kb[k].descriptor)
            ++failures;
      }
    }

    // Pyramid round trip.
    FeaturePyramid pyr;
    const int w = 16 + 2 * static_cast<int>(uniform_below(rng, 24));
    const int h = 16 + 2 * static_cast<int>(uniform_below(rng, 24));
    pyr.image_width = w;
    pyr.image_height = h;
    for (std::size_t li = 0; li < kPyramidScales.size(); ++li) {
      auto& level = pyr.levels[li];
      level.scale = kPyramidScales[li];
      level.width = w / level.scale;
      level.height = h / level.scale;
      level.descriptors.resize(static_cast<std::size_t>(level.width) *
                               level.height * kDescriptorDim);
      level.heatmap.resize(static_cast<std::size_t>(level.width) * level.height);
      for (auto& d : level.descriptors) d = static_cast<float>(gaussian(rng));
      for (auto& hcell : level.heatmap)
        hcell = static_cast<float>(uniform_unit(rng));
    }
    export_pyramid(pyr, pyr_path);
    const FeaturePyramid pback = import_pyramid(pyr_path);
    for (std::size_t li = 0; li < 3; ++li)
      if (pback.levels[li].descriptors != pyr.levels[li].descriptors ||
          pback.levels[li].heatmap != pyr.levels[li].heatmap)
        ++failures;
  }

  // Corruption rejection with located errors.
  bool rejected = true;
  {
    std::ifstream in(map_path, std::ios::binary);
    std::vector<char> bytes(std::istreambuf_iterator<char>(in), {});
    in.close();
    bytes[0] = 'x';
    std::ofstream(map_path, std::ios::binary | std::ios::trunc)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    try {
      (void)load_map(map_path);
      rejected = false;
    } catch (const FormatError& e) {
      if (std::string(e.what()).find("magic") == std::string::npos)
        rejected = false;
    }
  }
  {
    std::ifstream in(pyr_path, std::ios::binary);
    std::vector<char> bytes(std::istreambuf_iterator<char>(in), {});
    in.close();
    bytes.resize(bytes.size() * 2 / 3);
    std::ofstream(pyr_path, std::ios::binary | std::ios::trunc)
        .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    try {
      (void)import_pyramid(pyr_path);
      rejected = false;
    } catch (const FormatError& e) {
      if (std::string(e.what()).find("truncated") == std::string::npos)
        rejected = false;
    }
  }
  fs::remove(map_path);
  fs::remove(pyr_path);

  report(7, "persistence round trips", failures == 0 && rejected,
         fmt("%d mismatches over 100 rounds; corrupt files %s", failures,
             rejected ? "rejected with located errors" : "NOT rejected"));
}

// ---------------------------------------------------------------------------
// 8. Metrics: decompose_error vs rotation-matrix oracle on 10000 pairs to
//    1e-9; summary matches a counting oracle exactly.
void criterion_metrics() {
  std::mt19937_64 rng(8080);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    Pose3 gt;
    gt.position = Eigen::Vector3d(uniform_range(rng, -100, 100),
                                  uniform_range(rng, -100, 100),
                                  uniform_range(rng, -3, 3));
    gt.orientation = yaw_quaternion(uniform_range(rng, -M_PI, M_PI));
    Pose3 est = gt;
    est.position += Eigen::Vector3d(uniform_range(rng, -2, 2),
                                    uniform_range(rng, -2, 2), 0.0);
    est.orientation = yaw_quaternion(uniform_range(rng, -M_PI, M_PI));

    const ErrorRecord rec = decompose_error(est, gt);

    const Eigen::Matrix3d r = gt.orientation.toRotationMatrix();
    const double heading = std::atan2(r(1, 0), r(0, 0));
    const double ex = est.position.x() - gt.position.x();
    const double ey = est.position.y() - gt.position.y();
    const double lon = std::cos(heading) * ex + std::sin(heading) * ey;
    const double lat = -std::sin(heading) * ex + std::cos(heading) * ey;
    worst = std::max({worst, std::abs(rec.longitudinal - lon),
                      std::abs(rec.lateral - lat),
                      std::abs(rec.horizontal - std::hypot(ex, ey)),
                      std::abs(rec.horizontal * rec.horizontal -
                               (lon * lon + lat * lat))});
  }

  // Counting oracle for the summary.
  std::vector<ErrorRecord> records;
  std::mt19937_64 rng2(11);
  for (int i = 0; i < 200; ++i) {
    ErrorRecord r;
    r.horizontal = uniform_range(rng2, 0.0, 0.4);
    r.longitudinal = r.horizontal;
    r.lateral = 0.0;
    r.yaw_deg = uniform_range(rng2, 0.0, 0.8);
    r.available = uniform_unit(rng2) < 0.9;
    records.push_back(r);
  }
  const MetricsSummary s = summarize(records);
  int avail = 0;
  std::array<int, 3> ch = {0, 0, 0};
  std::array<int, 3> cy = {0, 0, 0};
  for (const auto& r : records) {
    if (!r.available) continue;
    ++avail;
    for (int i = 0; i < 3; ++i) {
      if (r.horizontal <= kHorizontalThresholds[i]) ++ch[i];
      if (r.yaw_deg <= kYawThresholdsDeg[i]) ++cy[i];
    }
  }
  bool counting_ok = avail == s.available_count;
  for (int i = 0; i < 3; ++i) {
    counting_ok = counting_ok &&
                  s.pct_horizontal_under[i] == 100.0 * ch[i] / avail &&
                  s.pct_yaw_under[i] == 100.0 * cy[i] / avail;
  }

  report(8, "metrics decomposition and summary", worst <= 1e-9 && counting_ok,
         fmt("oracle deviation %.2e (<= 1e-9), counting oracle %s", worst,
             counting_ok ? "exact" : "MISMATCH"));
}

}  // namespace

int main() {
  std::printf("vloc acceptance suite\n");
  criterion_noiseless_loop();
  criterion_noise_robustness();
  criterion_ablation_ordering();
  criterion_selection_oracle();
  criterion_probability_head();
  criterion_losses();
  criterion_persistence();
  criterion_metrics();
  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
