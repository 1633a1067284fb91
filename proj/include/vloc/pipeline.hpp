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

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "vloc/feature_embedding.hpp"
#include "vloc/geometry.hpp"
#include "vloc/map_store.hpp"
#include "vloc/matching.hpp"

namespace vloc {

/// One online frame: a pyramid per camera plus the dead-reckoned motion
/// since the previous frame (vehicle frame).
struct FrameInput {
  double timestamp = 0.0;
  std::vector<FeaturePyramid> pyramids;  // one per configured camera
  PoseSE2Offset incremental_motion;
};

/// A mapping frame additionally carries the ground-truth capture pose and
/// the depth-associated pixels per camera (mapping-only privilege).
struct MappingFrame {
  FrameInput frame;
  Pose3 ground_truth;
  std::vector<std::vector<DepthPoint>> depth_points;  // per camera
};

/// Search configuration of one cascade level.
struct LevelConfig {
  int scale = 8;  // pyramid scale this level matches on
  CostVolumeConfig volume;
  double temperature = 0.1;
};

struct PipelineConfig {
  std::vector<CameraModel> cameras;
  SelectionConfig selection;
  std::array<LevelConfig, 3> levels;  // cascade order: coarse -> fine
  MarginalizationMode marginalization = MarginalizationMode::kReduceAverage;
  ProbabilityCollapse collapse = ProbabilityCollapse::kSoftmaxThenSum;
  RegularizerWeights regularizer = RegularizerWeights::identity();
  AvailabilityThresholds thresholds;

  /// Default cascade: 11x11x11 grids at 0.5 m / 0.4 deg (scale 8),
  /// 0.25 m / 0.2 deg (scale 4) and 0.05 m / 0.05 deg (scale 2), with
  /// availability thresholds tied to the finest steps.
  static PipelineConfig defaults(std::vector<CameraModel> cameras);
};

struct LocalizationResult {
  double timestamp = 0.0;
  Pose3 estimated_pose;
  std::array<PoseSE2Offset, 3> offset_per_level;  // coarse -> fine
  std::vector<MarginalDistributions> distributions;  // per completed level
  bool available = false;
  int failed_level = -1;  // cascade index where matching failed, -1 if none
  std::array<double, 3> level_ms = {0.0, 0.0, 0.0};
  double total_ms = 0.0;
};

/// Build the map database from a mapping trial: one node per
/// (frame, camera), selected with cfg.selection (WFPS by default).
/// Node ids are frame_index * camera_count + camera_index. Aborts with
/// MapBuildError naming the frame on any per-frame failure.
MapDatabase generate_map(const std::vector<MappingFrame>& mapping_frames,
                         const PipelineConfig& cfg);

/// Localize one frame against the map: per camera the nearest node is
/// matched coarse-to-fine; each level's soft-argmax offset recenters the
/// next level's grid. Multi-camera volumes are averaged (marginalized,
/// node-wise) before the probability head. Matching failures flag the
/// result unavailable instead of throwing.
LocalizationResult localize_frame(const FrameInput& frame, const Pose3& prior,
                                  const MapDatabase& db,
                                  const PipelineConfig& cfg);

/// Localize a sequence; the prior of frame t is the previous output (or
/// previous prior while unavailable) composed with frame t's incremental
/// motion.
std::vector<LocalizationResult> run_sequence(
    const std::vector<FrameInput>& frames, const Pose3& initial_prior,
    const MapDatabase& db, const PipelineConfig& cfg);

/// Trajectory CSV: "timestamp,x,y,z,qw,qx,qy,qz" with one header line.
void save_trajectory_csv(const std::vector<std::pair<double, Pose3>>& poses,
                         const std::filesystem::path& path);
std::vector<std::pair<double, Pose3>> load_trajectory_csv(
    const std::filesystem::path& path);

/// Incremental motion CSV: "timestamp,dx,dy,dpsi" with one header line.
void save_motion_csv(
    const std::vector<std::pair<double, PoseSE2Offset>>& motions,
    const std::filesystem::path& path);
std::vector<std::pair<double, PoseSE2Offset>> load_motion_csv(
    const std::filesystem::path& path);

}  // namespace vloc
