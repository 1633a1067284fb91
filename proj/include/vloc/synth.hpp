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
#include <filesystem>
#include <vector>

#include "vloc/feature_embedding.hpp"
#include "vloc/geometry.hpp"
#include "vloc/map_store.hpp"
#include "vloc/types.hpp"

namespace vloc {

/// A world landmark: fixed 3D point, its canonical appearance and a
/// long-term matching reliability. Landmarks with reliability < 1 are
/// "unreliable" and subject to appearance changes during rendering.
struct Landmark {
  Vec3 position{0.0, 0.0, 0.0};
  Descriptor descriptor = Descriptor::Zero();  // unit norm
  double reliability = 1.0;                    // [0, 1]
};

/// Parameters of a generated world. The trajectory runs straight along +x
/// with landmarks scattered in a corridor around it.
struct WorldSpec {
  int landmark_count = 500;
  int trajectory_frames = 100;
  double frame_spacing = 1.0;     // meters between consecutive poses
  double corridor_radius = 12.0;  // max |y| of landmarks
  double corridor_margin = 25.0;  // landmark x extends this far past the ends
  double z_min = 0.5;             // landmark height range
  double z_max = 8.0;
  double stable_fraction = 1.0;   // fraction of landmarks with reliability 1
  double unreliable_min = 0.05;   // reliability range of the rest
  double unreliable_max = 0.30;
  int cameras = 1;                // 1 (front) or 3 (front, left, right)
  std::uint64_t seed = 0;
};

struct SyntheticWorld {
  std::vector<Landmark> landmarks;
  std::vector<Pose3> ground_truth_trajectory;
  std::vector<CameraModel> cameras;
  std::uint64_t seed = 0;
};

/// A rendered view: the pyramid an extractor would produce plus the exact
/// pixel/world associations of every visible landmark.
struct RenderResult {
  FeaturePyramid pyramid;
  std::vector<DepthPoint> depth_points;
};

/// Deterministically generate a world from its spec. Throws
/// std::invalid_argument on degenerate counts.
SyntheticWorld generate_world(const WorldSpec& spec);

/// Standard front camera used by generated worlds (640x480, f = 400 px,
/// mounted 1.6 m up). `yaw` rotates the mount about the vehicle vertical.
CameraModel make_camera(double yaw = 0.0);

/// Render the world from `pose` through `camera`:
///  - each visible landmark's descriptor is splatted at its projection's
///    nearest cell on every level, over a fixed low-magnitude noise
///    background;
///  - unreliable landmarks have their appearance replaced by fresh unit
///    noise with probability drop_rate, then all splats get N(0, sigma^2)
///    per-component noise;
///  - the heatmap is the landmark's reliability at its cell, 0 elsewhere;
///  - depth_points lists the exact (pixel, world) pair per visible
///    landmark.
/// Deterministic for fixed (world, pose, camera, seed).
RenderResult render_view(const SyntheticWorld& world, const Pose3& pose,
                         const CameraModel& camera, double noise_sigma,
                         double drop_rate, std::uint64_t seed);

/// Uniform planar perturbation within the given bounds, applied with
/// apply_offset. Deterministic under seed.
Pose3 perturb_pose(const Pose3& pose, double max_dx, double max_dy,
                   double max_dpsi, std::uint64_t seed);

/// Plain key-value world spec file ("key value" per line, '#' comments).
WorldSpec load_world_spec(const std::filesystem::path& path);
void save_world_spec(const WorldSpec& spec, const std::filesystem::path& path);

}  // namespace vloc
