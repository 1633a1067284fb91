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

#include "vloc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "vloc/errors.hpp"
#include "vloc/rng.hpp"

namespace vloc {

namespace {

Descriptor random_unit_descriptor(std::mt19937_64& rng) {
  DescriptorD d;
  for (int i = 0; i < kDescriptorDim; ++i) d[i] = gaussian(rng);
  const double n = d.norm();
  if (n == 0.0) return Descriptor::Unit(0);
  return (d / n).cast<float>();
}

// Fixed per-(level, cell) background appearance: deterministic across
// renders so it behaves like static but uninformative scene texture.
// Hash-driven (no RNG object) because it runs for every cell of every
// render.
Descriptor background_descriptor(int level_index, int u, int v) {
  std::uint64_t state =
      split_seed(0x5eedba5eULL + level_index,
                 (static_cast<std::uint64_t>(v) << 24) ^ static_cast<std::uint64_t>(u));
  auto next_unit = [&state]() {
    state = split_seed(state, 1);
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  DescriptorD d;
  for (int i = 0; i < kDescriptorDim; i += 2) {
    double u1 = next_unit();
    const double u2 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    d[i] = r * std::cos(6.283185307179586477 * u2);
    d[i + 1] = r * std::sin(6.283185307179586477 * u2);
  }
  const double n = d.norm();
  constexpr double kBackgroundMagnitude = 0.1;
  if (n == 0.0) return Descriptor::Zero();
  return (d * (kBackgroundMagnitude / n)).cast<float>();
}

}  // namespace

CameraModel make_camera(double yaw) {
  CameraModel cam;
  cam.fx = 400.0;
  cam.fy = 400.0;
  cam.cx = 320.0;
  cam.cy = 240.0;
  cam.width = 640;
  cam.height = 480;
  // Camera optical axis along vehicle +x (after yaw), x right, y down.
  Eigen::Matrix3d r;
  r.col(0) = Eigen::Vector3d(0.0, -1.0, 0.0);   // camera x in vehicle frame
  r.col(1) = Eigen::Vector3d(0.0, 0.0, -1.0);   // camera y
  r.col(2) = Eigen::Vector3d(1.0, 0.0, 0.0);    // camera z
  cam.extrinsic.position = Eigen::Vector3d(0.0, 0.0, 1.6);
  cam.extrinsic.orientation =
      (yaw_quaternion(yaw) * Eigen::Quaterniond(r)).normalized();
  return cam;
}

SyntheticWorld generate_world(const WorldSpec& spec) {
  if (spec.landmark_count < 1 || spec.trajectory_frames < 1)
    throw std::invalid_argument("generate_world: counts must be >= 1");
  if (spec.stable_fraction < 0.0 || spec.stable_fraction > 1.0)
    throw std::invalid_argument("generate_world: stable_fraction outside [0, 1]");
  if (spec.cameras != 1 && spec.cameras != 3)
    throw std::invalid_argument("generate_world: cameras must be 1 or 3");

  SyntheticWorld world;
  world.seed = spec.seed;

  world.ground_truth_trajectory.reserve(spec.trajectory_frames);
  for (int i = 0; i < spec.trajectory_frames; ++i) {
    Pose3 pose;
    pose.position = Eigen::Vector3d(i * spec.frame_spacing, 0.0, 0.0);
    world.ground_truth_trajectory.push_back(pose);
  }

  world.cameras.push_back(make_camera(0.0));
  if (spec.cameras == 3) {
    world.cameras.push_back(make_camera(40.0 * M_PI / 180.0));
    world.cameras.push_back(make_camera(-40.0 * M_PI / 180.0));
  }

  const double x_lo = -spec.corridor_margin;
  const double x_hi =
      (spec.trajectory_frames - 1) * spec.frame_spacing + spec.corridor_margin;
  const int stable_count = static_cast<int>(
      std::lround(spec.stable_fraction * spec.landmark_count));

  std::mt19937_64 rng(split_seed(spec.seed, 0x1a2db3c4));
  world.landmarks.reserve(spec.landmark_count);
  for (int i = 0; i < spec.landmark_count; ++i) {
    Landmark lm;
    lm.position = Eigen::Vector3d(uniform_range(rng, x_lo, x_hi),
                                  uniform_range(rng, -spec.corridor_radius,
                                                spec.corridor_radius),
                                  uniform_range(rng, spec.z_min, spec.z_max));
    lm.descriptor = random_unit_descriptor(rng);
    lm.reliability = i < stable_count
                         ? 1.0
                         : uniform_range(rng, spec.unreliable_min,
                                         spec.unreliable_max);
    world.landmarks.push_back(lm);
  }
  return world;
}

RenderResult render_view(const SyntheticWorld& world, const Pose3& pose,
                         const CameraModel& camera, double noise_sigma,
                         double drop_rate, std::uint64_t seed) {
  RenderResult out;
  FeaturePyramid& pyr = out.pyramid;
  pyr.image_width = camera.width;
  pyr.image_height = camera.height;
  for (size_t li = 0; li < kPyramidScales.size(); ++li) {
    DenseFeatureLevel& level = pyr.levels[li];
    level.scale = kPyramidScales[li];
    level.width = camera.width / level.scale;
    level.height = camera.height / level.scale;
    level.descriptors.resize(
        static_cast<size_t>(level.width) * level.height * kDescriptorDim);
    level.heatmap.assign(static_cast<size_t>(level.width) * level.height, 0.0f);
    for (int v = 0; v < level.height; ++v)
      for (int u = 0; u < level.width; ++u) {
        const Descriptor bg = background_descriptor(static_cast<int>(li), u, v);
        std::copy_n(bg.data(), kDescriptorDim, level.desc_at(u, v));
      }
  }

  std::mt19937_64 rng(split_seed(seed, 0x7e4de7));
  for (size_t lm_idx = 0; lm_idx < world.landmarks.size(); ++lm_idx) {
    const Landmark& lm = world.landmarks[lm_idx];

    // Appearance this render: possibly dropped (unreliable only), always
    // jittered by noise_sigma. Drawn even for invisible landmarks so the
    // stream stays aligned across poses with the same seed.
    Descriptor appearance = lm.descriptor;
    if (lm.reliability < 1.0 && drop_rate > 0.0 &&
        uniform_unit(rng) < drop_rate)
      appearance = random_unit_descriptor(rng);
    if (noise_sigma > 0.0)
      for (int k = 0; k < kDescriptorDim; ++k)
        appearance[k] += static_cast<float>(noise_sigma * gaussian(rng));

    const auto proj = project_point(lm.position, pose, camera);
    if (!proj) continue;

    out.depth_points.push_back(DepthPoint{proj->u, proj->v, lm.position});
    for (auto& level : pyr.levels) {
      const int cu = std::clamp(
          static_cast<int>(std::lround(proj->u / level.scale)), 0,
          level.width - 1);
      const int cv = std::clamp(
          static_cast<int>(std::lround(proj->v / level.scale)), 0,
          level.height - 1);
      std::copy_n(appearance.data(), kDescriptorDim, level.desc_at(cu, cv));
      float& heat = level.heatmap[static_cast<size_t>(cv) * level.width + cu];
      heat = std::max(heat, static_cast<float>(lm.reliability));
    }
  }
  return out;
}

Pose3 perturb_pose(const Pose3& pose, double max_dx, double max_dy,
                   double max_dpsi, std::uint64_t seed) {
  if (max_dx < 0.0 || max_dy < 0.0 || max_dpsi < 0.0)
    throw std::invalid_argument("perturb_pose: bounds must be >= 0");
  std::mt19937_64 rng(split_seed(seed, 0xbada11ce));
  const double dx = max_dx > 0.0 ? uniform_range(rng, -max_dx, max_dx) : 0.0;
  const double dy = max_dy > 0.0 ? uniform_range(rng, -max_dy, max_dy) : 0.0;
  const double dpsi =
      max_dpsi > 0.0 ? uniform_range(rng, -max_dpsi, max_dpsi) : 0.0;
  return apply_offset(pose, PoseSE2Offset(dx, dy, dpsi));
}

WorldSpec load_world_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open world spec: " + path.string());
  WorldSpec spec;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;

    auto parse = [&](auto& field) {
      if (!(ss >> field))
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": bad value for " + key);
    };
    if (key == "landmark_count") parse(spec.landmark_count);
    else if (key == "trajectory_frames") parse(spec.trajectory_frames);
    else if (key == "frame_spacing") parse(spec.frame_spacing);
    else if (key == "corridor_radius") parse(spec.corridor_radius);
    else if (key == "corridor_margin") parse(spec.corridor_margin);
    else if (key == "z_min") parse(spec.z_min);
    else if (key == "z_max") parse(spec.z_max);
    else if (key == "stable_fraction") parse(spec.stable_fraction);
    else if (key == "unreliable_min") parse(spec.unreliable_min);
    else if (key == "unreliable_max") parse(spec.unreliable_max);
    else if (key == "cameras") parse(spec.cameras);
    else if (key == "seed") parse(spec.seed);
    else
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": unknown key \"" + key + "\"");
  }
  return spec;
}

void save_world_spec(const WorldSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write world spec: " + path.string());
  out << "landmark_count " << spec.landmark_count << "\n"
      << "trajectory_frames " << spec.trajectory_frames << "\n"
      << "frame_spacing " << spec.frame_spacing << "\n"
      << "corridor_radius " << spec.corridor_radius << "\n"
      << "corridor_margin " << spec.corridor_margin << "\n"
      << "z_min " << spec.z_min << "\n"
      << "z_max " << spec.z_max << "\n"
      << "stable_fraction " << spec.stable_fraction << "\n"
      << "unreliable_min " << spec.unreliable_min << "\n"
      << "unreliable_max " << spec.unreliable_max << "\n"
      << "cameras " << spec.cameras << "\n"
      << "seed " << spec.seed << "\n";
}

}  // namespace vloc
