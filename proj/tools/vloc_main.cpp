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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vloc/benchmark.hpp"
#include "vloc/errors.hpp"
#include "vloc/eval.hpp"
#include "vloc/pipeline.hpp"
#include "vloc/rng.hpp"
#include "vloc/synth.hpp"

namespace fs = std::filesystem;
using namespace vloc;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "World spec file (key value lines)");
  cmd->add_option("--seed", opts.seed, "Override the world seed");
}

WorldSpec resolve_world(const CommonOptions& opts) {
  WorldSpec spec;
  if (!opts.config.empty()) spec = load_world_spec(opts.config);
  if (opts.seed) spec.seed = *opts.seed;
  return spec;
}

std::vector<std::pair<double, Pose3>> stamped(const std::vector<Pose3>& poses) {
  std::vector<std::pair<double, Pose3>> out;
  for (std::size_t i = 0; i < poses.size(); ++i)
    out.emplace_back(static_cast<double>(i), poses[i]);
  return out;
}

void write_run_outputs(const BenchmarkRun& run, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  save_results_csv(run.records, out_dir / "results.csv");
  save_trajectory_csv(stamped(run.estimated_poses), out_dir / "est_trajectory.csv");
  save_trajectory_csv(stamped(run.ground_truth), out_dir / "gt_trajectory.csv");
  const MetricsSummary summary = summarize(run.records);
  std::ofstream(out_dir / "summary.json") << summary_to_json(summary) << "\n";
  std::cout << summary_table(summary);
  std::cout << "mean frame time: " << run.mean_frame_ms << " ms\n";
  std::cout << "outputs in " << out_dir.string() << "\n";
}

fs::path pyramid_name(const fs::path& dir, std::size_t frame, std::size_t cam) {
  char name[64];
  std::snprintf(name, sizeof(name), "frame_%06zu_cam%02zu.alfp", frame, cam);
  return dir / name;
}

int cmd_build_map(const CommonOptions& common, const std::string& out,
                  const std::string& export_pyramids,
                  const std::string& selection) {
  const WorldSpec spec = resolve_world(common);
  const SyntheticWorld world = generate_world(spec);

  BenchmarkOptions options;
  options.world = spec;
  options.selection =
      selection == "fps" ? SelectionStrategy::kFps : SelectionStrategy::kWfps;
  const PipelineConfig cfg = benchmark_pipeline_config(options, world);

  std::vector<MappingFrame> mapping;
  for (std::size_t fi = 0; fi < world.ground_truth_trajectory.size(); ++fi) {
    MappingFrame mf;
    mf.frame.timestamp = static_cast<double>(fi);
    mf.ground_truth = world.ground_truth_trajectory[fi];
    for (std::size_t ci = 0; ci < world.cameras.size(); ++ci) {
      RenderResult r =
          render_view(world, mf.ground_truth, world.cameras[ci], 0.0, 0.0,
                      split_seed(world.seed, fi * 16 + ci));
      if (!export_pyramids.empty()) {
        fs::create_directories(export_pyramids);
        export_pyramid(r.pyramid, pyramid_name(export_pyramids, fi, ci));
      }
      mf.frame.pyramids.push_back(std::move(r.pyramid));
      mf.depth_points.push_back(std::move(r.depth_points));
    }
    mapping.push_back(std::move(mf));
  }

  const MapDatabase db = generate_map(mapping, cfg);
  save_map(db, out);
  std::cout << "map with " << db.size() << " nodes written to " << out << "\n";
  return 0;
}

int cmd_localize(const CommonOptions& common, const std::string& map_path,
                 const fs::path& out_dir, double noise, double drop_rate,
                 const std::string& import_pyramids, bool dead_reckoning,
                 std::uint64_t run_seed) {
  const WorldSpec spec = resolve_world(common);
  const SyntheticWorld world = generate_world(spec);
  const MapDatabase db = load_map(map_path);

  BenchmarkOptions options;
  options.world = spec;
  const PipelineConfig cfg = benchmark_pipeline_config(options, world);

  std::vector<FrameInput> frames;
  for (std::size_t fi = 0; fi < world.ground_truth_trajectory.size(); ++fi) {
    FrameInput frame;
    frame.timestamp = static_cast<double>(fi);
    for (std::size_t ci = 0; ci < world.cameras.size(); ++ci) {
      if (!import_pyramids.empty()) {
        frame.pyramids.push_back(
            import_pyramid(pyramid_name(import_pyramids, fi, ci)));
      } else {
        RenderResult r = render_view(
            world, world.ground_truth_trajectory[fi], world.cameras[ci], noise,
            drop_rate, split_seed(run_seed, 0x0a11e5 + fi * 16 + ci));
        frame.pyramids.push_back(std::move(r.pyramid));
      }
    }
    frame.incremental_motion =
        fi == 0 ? PoseSE2Offset() : PoseSE2Offset(spec.frame_spacing, 0.0, 0.0);
    frames.push_back(std::move(frame));
  }

  BenchmarkRun run;
  run.map = db;
  run.ground_truth = world.ground_truth_trajectory;
  if (dead_reckoning) {
    const Pose3 initial =
        perturb_pose(world.ground_truth_trajectory.front(), 1.0, 1.0,
                     2.0 * M_PI / 180.0, split_seed(run_seed, 0x1717));
    run.results = run_sequence(frames, initial, db, cfg);
  } else {
    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
      const Pose3 prior =
          perturb_pose(world.ground_truth_trajectory[fi], 1.0, 1.0,
                       2.0 * M_PI / 180.0, split_seed(run_seed, 0x9712 + fi));
      run.results.push_back(localize_frame(frames[fi], prior, db, cfg));
    }
  }
  double total_ms = 0.0;
  for (std::size_t fi = 0; fi < run.results.size(); ++fi) {
    ErrorRecord rec = decompose_error(run.results[fi].estimated_pose,
                                      world.ground_truth_trajectory[fi]);
    rec.timestamp = run.results[fi].timestamp;
    rec.available = run.results[fi].available;
    run.records.push_back(rec);
    run.estimated_poses.push_back(run.results[fi].estimated_pose);
    total_ms += run.results[fi].total_ms;
  }
  run.mean_frame_ms = total_ms / static_cast<double>(run.results.size());
  write_run_outputs(run, out_dir);
  return 0;
}

int cmd_eval(const std::string& results_path, const std::string& est_path,
             const std::string& gt_path, const std::string& out_json,
             const std::string& per_frame_csv) {
  std::vector<ErrorRecord> records;
  if (!results_path.empty()) {
    records = load_results_csv(results_path);
  } else {
    const auto est = load_trajectory_csv(est_path);
    const auto gt = load_trajectory_csv(gt_path);
    if (est.size() != gt.size())
      throw FormatError("eval: trajectory lengths differ (" +
                        std::to_string(est.size()) + " vs " +
                        std::to_string(gt.size()) + ")");
    for (std::size_t i = 0; i < est.size(); ++i) {
      ErrorRecord rec = decompose_error(est[i].second, gt[i].second);
      rec.timestamp = est[i].first;
      records.push_back(rec);
    }
  }
  if (records.empty()) throw FormatError("eval: no records");

  const MetricsSummary summary = summarize(records);
  std::cout << summary_table(summary);
  if (!out_json.empty())
    std::ofstream(out_json) << summary_to_json(summary) << "\n";
  if (!per_frame_csv.empty()) save_results_csv(records, per_frame_csv);
  return 0;
}

int cmd_ablate(const CommonOptions& common, const std::string& out_csv,
               int runs, double noise, double drop_rate) {
  WorldSpec spec = resolve_world(common);
  if (spec.stable_fraction >= 1.0) spec.stable_fraction = 0.8;

  struct Row {
    const char* selection;
    const char* marginalization;
    SelectionStrategy strategy;
    MarginalizationMode mode;
    double rms_sum = 0.0;
    double na_sum = 0.0;
  };
  std::vector<Row> rows = {
      {"wfps", "weighted", SelectionStrategy::kWfps, MarginalizationMode::kWeightedAverage},
      {"wfps", "reduce", SelectionStrategy::kWfps, MarginalizationMode::kReduceAverage},
      {"fps", "weighted", SelectionStrategy::kFps, MarginalizationMode::kWeightedAverage},
      {"fps", "reduce", SelectionStrategy::kFps, MarginalizationMode::kReduceAverage},
  };

  for (Row& row : rows) {
    for (int r = 0; r < runs; ++r) {
      BenchmarkOptions options;
      options.world = spec;
      options.world.seed = split_seed(spec.seed, r);
      options.noise_sigma = noise;
      options.drop_rate = drop_rate;
      options.selection = row.strategy;
      options.marginalization = row.mode;
      options.run_seed = split_seed(spec.seed, 500 + r);
      const MetricsSummary s = summarize(run_closed_loop(options).records);
      row.rms_sum += s.has_metrics ? s.rms_horizontal : 1e9;
      row.na_sum += s.na_percent;
    }
  }

  std::ofstream out(out_csv, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + out_csv);
  out << "selection,marginalization,rms_horizontal,na_percent\n";
  std::cout << "selection  marginalization  RMS horizontal   N/A%\n";
  for (const Row& row : rows) {
    const double rms = row.rms_sum / runs;
    const double na = row.na_sum / runs;
    out << row.selection << ',' << row.marginalization << ',' << rms << ','
        << na << "\n";
    std::printf("%-10s %-16s %10.4f m %8.1f\n", row.selection,
                row.marginalization, rms, na);
  }
  std::cout << "ablation rows written to " << out_csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attention-weighted visual localization against a keypoint map"};
  app.require_subcommand(1);

  // synth
  CommonOptions synth_common;
  BenchmarkOptions synth_options;
  std::string synth_out = "vloc_out";
  bool synth_dead_reckoning = false;
  int synth_frames = -1, synth_landmarks = -1, synth_cameras = -1;
  double synth_stable = -1.0;
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic world and run the closed-loop benchmark");
  add_common(synth, synth_common);
  synth->add_option("--frames", synth_frames, "Trajectory frames");
  synth->add_option("--landmarks", synth_landmarks, "Landmark count");
  synth->add_option("--cameras", synth_cameras, "Camera count (1 or 3)");
  synth->add_option("--stable-fraction", synth_stable, "Reliable landmark fraction");
  synth->add_option("--noise", synth_options.noise_sigma, "Descriptor noise sigma");
  synth->add_option("--drop-rate", synth_options.drop_rate,
                    "Unreliable appearance drop probability");
  synth->add_option("--out-dir", synth_out, "Output directory");
  synth->add_flag("--dead-reckoning", synth_dead_reckoning,
                  "Chain priors from previous outputs instead of perturbed truth");

  // build-map
  CommonOptions bm_common;
  std::string bm_out = "map.almp", bm_export, bm_selection = "wfps";
  auto* build_map_cmd =
      app.add_subcommand("build-map", "Render a mapping pass and save the map");
  add_common(build_map_cmd, bm_common);
  build_map_cmd->add_option("--out", bm_out, "Output map file");
  build_map_cmd->add_option("--export-pyramids", bm_export,
                            "Also write per-frame pyramid tensors here");
  build_map_cmd->add_option("--selection", bm_selection, "wfps or fps")
      ->check(CLI::IsMember({"wfps", "fps"}));

  // localize
  CommonOptions loc_common;
  std::string loc_map = "map.almp", loc_import;
  std::string loc_out = "vloc_out";
  double loc_noise = 0.0, loc_drop = 0.0;
  bool loc_dead_reckoning = false;
  std::uint64_t loc_run_seed = 1;
  auto* localize_cmd =
      app.add_subcommand("localize", "Localize an online pass against a map");
  add_common(localize_cmd, loc_common);
  localize_cmd->add_option("--map", loc_map, "Map file")->required();
  localize_cmd->add_option("--out-dir", loc_out, "Output directory");
  localize_cmd->add_option("--noise", loc_noise, "Descriptor noise sigma");
  localize_cmd->add_option("--drop-rate", loc_drop, "Appearance drop probability");
  localize_cmd->add_option("--import-pyramids", loc_import,
                           "Read online pyramids from this directory");
  localize_cmd->add_option("--run-seed", loc_run_seed, "Online noise seed");
  localize_cmd->add_flag("--dead-reckoning", loc_dead_reckoning,
                         "Chain priors from previous outputs");

  // eval
  std::string eval_results, eval_est, eval_gt, eval_json, eval_per_frame;
  auto* eval_cmd = app.add_subcommand("eval", "Summarize localization results");
  eval_cmd->add_option("--results", eval_results,
                       "Per-frame results CSV (as written by synth/localize)");
  eval_cmd->add_option("--est", eval_est, "Estimated trajectory CSV");
  eval_cmd->add_option("--gt", eval_gt, "Ground-truth trajectory CSV");
  eval_cmd->add_option("--out", eval_json, "Write summary JSON here");
  eval_cmd->add_option("--per-frame", eval_per_frame,
                       "Write plot-ready per-frame CSV here");
  // Accepted for interface uniformity; eval reads no world spec.
  CommonOptions eval_common;
  add_common(eval_cmd, eval_common);

  // ablate
  CommonOptions ab_common;
  std::string ab_out = "ablation.csv";
  int ab_runs = 1;
  double ab_noise = 0.1, ab_drop = 0.5;
  auto* ablate_cmd = app.add_subcommand(
      "ablate", "Selection x marginalization grid on the noisy benchmark");
  add_common(ablate_cmd, ab_common);
  ablate_cmd->add_option("--out", ab_out, "Output CSV");
  ablate_cmd->add_option("--runs", ab_runs, "Seeded repetitions per cell");
  ablate_cmd->add_option("--noise", ab_noise, "Descriptor noise sigma");
  ablate_cmd->add_option("--drop-rate", ab_drop, "Appearance drop probability");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      synth_options.world = resolve_world(synth_common);
      if (synth_frames > 0) synth_options.world.trajectory_frames = synth_frames;
      if (synth_landmarks > 0) synth_options.world.landmark_count = synth_landmarks;
      if (synth_cameras > 0) synth_options.world.cameras = synth_cameras;
      if (synth_stable >= 0.0) synth_options.world.stable_fraction = synth_stable;
      synth_options.run_seed = split_seed(synth_options.world.seed, 0xc1f);
      synth_options.prior_mode = synth_dead_reckoning
                                     ? PriorMode::kDeadReckoning
                                     : PriorMode::kPerturbedTruth;
      const BenchmarkRun run = run_closed_loop(synth_options);
      write_run_outputs(run, synth_out);
      return 0;
    }
    if (build_map_cmd->parsed())
      return cmd_build_map(bm_common, bm_out, bm_export, bm_selection);
    if (localize_cmd->parsed())
      return cmd_localize(loc_common, loc_map, loc_out, loc_noise, loc_drop,
                          loc_import, loc_dead_reckoning, loc_run_seed);
    if (eval_cmd->parsed())
      return cmd_eval(eval_results, eval_est, eval_gt, eval_json, eval_per_frame);
    if (ablate_cmd->parsed())
      return cmd_ablate(ab_common, ab_out, ab_runs, ab_noise, ab_drop);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
