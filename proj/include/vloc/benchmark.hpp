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

#pragma once

#include <cstdint>
#include <vector>

#include "vloc/eval.hpp"
#include "vloc/pipeline.hpp"
#include "vloc/synth.hpp"

namespace vloc {

/// How the per-frame prior is produced during a benchmark run.
enum class PriorMode : std::uint8_t {
  /// Ground truth perturbed uniformly within the bounds, per frame.
  kPerturbedTruth,
  /// Dead reckoning: previous output + noisy incremental motion
  /// (run_sequence semantics).
  kDeadReckoning,
};

/// Closed-loop benchmark options: a world, online rendering noise, and
/// prior generation.
struct BenchmarkOptions {
  WorldSpec world;
  double noise_sigma = 0.0;  // online render descriptor noise
  double drop_rate = 0.0;    // online render appearance drop (unreliable)
  double prior_max_xy = 1.0;       // meters, per axis
  double prior_max_psi = 2.0 * M_PI / 180.0;  // radians
  PriorMode prior_mode = PriorMode::kPerturbedTruth;
  SelectionStrategy selection = SelectionStrategy::kWfps;
  MarginalizationMode marginalization = MarginalizationMode::kReduceAverage;
  std::uint64_t run_seed = 1;  // decorrelates renders/priors from the world
};

struct BenchmarkRun {
  std::vector<LocalizationResult> results;
  std::vector<ErrorRecord> records;     // vs ground truth, per frame
  std::vector<Pose3> estimated_poses;   // per frame
  std::vector<Pose3> ground_truth;      // per frame
  double mean_frame_ms = 0.0;
  MapDatabase map;
};

/// Render a mapping pass of the world (noiseless), build the map with the
/// requested selection strategy, then localize an online pass rendered
/// with the requested noise. Deterministic under (world seed, run_seed).
BenchmarkRun run_closed_loop(const BenchmarkOptions& options);

/// The pipeline configuration a benchmark run uses (defaults plus the
/// options' selection and marginalization choices).
PipelineConfig benchmark_pipeline_config(const BenchmarkOptions& options,
                                         const SyntheticWorld& world);

}  // namespace vloc
