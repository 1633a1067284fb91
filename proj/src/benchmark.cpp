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

#include "vloc/benchmark.hpp"

#include <cmath>

#include "vloc/rng.hpp"

namespace vloc {

PipelineConfig benchmark_pipeline_config(const BenchmarkOptions& options,
                                         const SyntheticWorld& world) {
  PipelineConfig cfg = PipelineConfig::defaults(world.cameras);
  cfg.selection.rng_seed = split_seed(options.run_seed, 101);
  cfg.selection.strategy = options.selection;
  cfg.marginalization = options.marginalization;
  return cfg;
}

BenchmarkRun run_closed_loop(const BenchmarkOptions& options) {
  const SyntheticWorld world = generate_world(options.world);
  const PipelineConfig cfg = benchmark_pipeline_config(options, world);
  const std::size_t cam_count = world.cameras.size();

  BenchmarkRun run;
  run.ground_truth = world.ground_truth_trajectory;

  // Mapping pass: noiseless renders at the ground-truth poses.
  std::vector<MappingFrame> mapping;
  mapping.reserve(world.ground_truth_trajectory.size());
  for (std::size_t fi = 0; fi < world.ground_truth_trajectory.size(); ++fi) {
    const Pose3& gt = world.ground_truth_trajectory[fi];
    MappingFrame mf;
    mf.frame.timestamp = static_cast<double>(fi);
    mf.ground_truth = gt;
    for (std::size_t ci = 0; ci < cam_count; ++ci) {
      RenderResult r = render_view(world, gt, world.cameras[ci], 0.0, 0.0,
                                   split_seed(world.seed, fi * 16 + ci));
      mf.frame.pyramids.push_back(std::move(r.pyramid));
      mf.depth_points.push_back(std::move(r.depth_points));
    }
    mapping.push_back(std::move(mf));
  }
  run.map = generate_map(mapping, cfg);

  // Online pass over the same trajectory with rendering noise.
  std::vector<FrameInput> frames;
  frames.reserve(world.ground_truth_trajectory.size());
  for (std::size_t fi = 0; fi < world.ground_truth_trajectory.size(); ++fi) {
    FrameInput frame;
    frame.timestamp = static_cast<double>(fi);
    for (std::size_t ci = 0; ci < cam_count; ++ci) {
      RenderResult r = render_view(
          world, world.ground_truth_trajectory[fi], world.cameras[ci],
          options.noise_sigma, options.drop_rate,
          split_seed(options.run_seed, 0x0a11e5 + fi * 16 + ci));
      frame.pyramids.push_back(std::move(r.pyramid));
    }
    // Exact inter-frame motion (straight trajectory): used only by the
    // dead-reckoning prior mode.
    frame.incremental_motion =
        fi == 0 ? PoseSE2Offset()
                : PoseSE2Offset(options.world.frame_spacing, 0.0, 0.0);
    frames.push_back(std::move(frame));
  }

  if (options.prior_mode == PriorMode::kDeadReckoning) {
    // Perturb the motions so the dead-reckoned prior drifts realistically.
    for (std::size_t fi = 1; fi < frames.size(); ++fi) {
      std::mt19937_64 rng(split_seed(options.run_seed, 0xdead + fi));
      frames[fi].incremental_motion = PoseSE2Offset(
          frames[fi].incremental_motion.dx +
              uniform_range(rng, -0.2 * options.prior_max_xy,
                            0.2 * options.prior_max_xy),
          uniform_range(rng, -0.2 * options.prior_max_xy,
                        0.2 * options.prior_max_xy),
          uniform_range(rng, -0.2 * options.prior_max_psi,
                        0.2 * options.prior_max_psi));
    }
    const Pose3 initial = perturb_pose(
        world.ground_truth_trajectory.front(), options.prior_max_xy,
        options.prior_max_xy, options.prior_max_psi,
        split_seed(options.run_seed, 0x1717));
    run.results = run_sequence(frames, initial, run.map, cfg);
  } else {
    run.results.reserve(frames.size());
    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
      const Pose3 prior = perturb_pose(
          world.ground_truth_trajectory[fi], options.prior_max_xy,
          options.prior_max_xy, options.prior_max_psi,
          split_seed(options.run_seed, 0x9712 + fi));
      run.results.push_back(localize_frame(frames[fi], prior, run.map, cfg));
    }
  }

  run.records.reserve(run.results.size());
  double total_ms = 0.0;
  for (std::size_t fi = 0; fi < run.results.size(); ++fi) {
    const LocalizationResult& res = run.results[fi];
    ErrorRecord rec =
        decompose_error(res.estimated_pose, world.ground_truth_trajectory[fi]);
    rec.timestamp = res.timestamp;
    rec.available = res.available;
    run.records.push_back(rec);
    run.estimated_poses.push_back(res.estimated_pose);
    total_ms += res.total_ms;
  }
  run.mean_frame_ms = total_ms / static_cast<double>(run.results.size());
  return run;
}

}  // namespace vloc
