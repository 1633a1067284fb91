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

#include "vloc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "vloc/errors.hpp"

namespace vloc {

namespace {

constexpr double kDegree = M_PI / 180.0;

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

// Node-wise mean of per-camera marginalized volumes; a node is available
// when any camera saw it.
MarginalizedVolume fuse_cameras(const std::vector<MarginalizedVolume>& vols) {
  MarginalizedVolume out = vols.front();
  if (vols.size() == 1) return out;
  const int nodes = out.cfg.node_count();
  for (int n = 0; n < nodes; ++n) {
    double sum = 0.0;
    int count = 0;
    for (const auto& v : vols) {
      if (!v.available[n]) continue;
      sum += v.cost[n];
      ++count;
    }
    out.available[n] = count > 0 ? 1 : 0;
    out.cost[n] = count > 0 ? sum / count : 0.0;
  }
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::defaults(std::vector<CameraModel> cameras) {
  PipelineConfig cfg;
  cfg.cameras = std::move(cameras);

  // Temperatures shrink with the grid steps: the descriptor-cost scale
  // stays fixed across levels while the per-step cost contrast drops, so
  // the finer softmax heads need sharper weighting to stay concentrated.
  auto level = [](int scale, double step_xy, double step_psi_deg, double temp) {
    LevelConfig lc;
    lc.scale = scale;
    lc.volume.n_x = lc.volume.n_y = lc.volume.n_psi = 11;
    lc.volume.step_x = lc.volume.step_y = step_xy;
    lc.volume.step_psi = step_psi_deg * kDegree;
    lc.temperature = temp;
    return lc;
  };
  cfg.levels = {level(8, 0.5, 0.4, 0.03), level(4, 0.25, 0.2, 0.02),
                level(2, 0.05, 0.05, 0.015)};
  cfg.thresholds = AvailabilityThresholds::from_steps(0.05, 0.05 * kDegree);
  return cfg;
}

MapDatabase generate_map(const std::vector<MappingFrame>& mapping_frames,
                         const PipelineConfig& cfg) {
  MapDatabase db;
  const std::size_t cam_count = cfg.cameras.size();
  for (std::size_t fi = 0; fi < mapping_frames.size(); ++fi) {
    const MappingFrame& mf = mapping_frames[fi];
    if (mf.frame.pyramids.size() != cam_count ||
        mf.depth_points.size() != cam_count)
      throw MapBuildError("generate_map: frame " + std::to_string(fi) +
                          " has " + std::to_string(mf.frame.pyramids.size()) +
                          " pyramids / " + std::to_string(mf.depth_points.size()) +
                          " depth sets for " + std::to_string(cam_count) +
                          " cameras");
    for (std::size_t ci = 0; ci < cam_count; ++ci) {
      try {
        db.add_node(build_node(mf.frame.pyramids[ci], mf.depth_points[ci],
                               mf.ground_truth, static_cast<std::uint16_t>(ci),
                               fi * cam_count + ci, cfg.selection));
      } catch (const Error& e) {
        throw MapBuildError("generate_map: frame " + std::to_string(fi) +
                            ", camera " + std::to_string(ci) + ": " + e.what());
      }
    }
  }
  return db;
}

LocalizationResult localize_frame(const FrameInput& frame, const Pose3& prior,
                                  const MapDatabase& db,
                                  const PipelineConfig& cfg) {
  if (db.empty()) throw QueryError("localize_frame: empty map database");
  if (frame.pyramids.size() != cfg.cameras.size())
    throw std::invalid_argument("localize_frame: frame has " +
                                std::to_string(frame.pyramids.size()) +
                                " pyramids for " +
                                std::to_string(cfg.cameras.size()) + " cameras");

  const auto frame_start = std::chrono::steady_clock::now();
  LocalizationResult result;
  result.timestamp = frame.timestamp;
  result.estimated_pose = prior;
  result.distributions.reserve(cfg.levels.size());

  // Map nodes are queried once per frame from the prior.
  std::vector<const MapNode*> nodes;
  nodes.reserve(cfg.cameras.size());
  for (std::size_t ci = 0; ci < cfg.cameras.size(); ++ci)
    nodes.push_back(&db.nearest_node(prior, static_cast<std::uint16_t>(ci)));

  Pose3 running = prior;
  for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
    const auto level_start = std::chrono::steady_clock::now();
    const LevelConfig& lc = cfg.levels[li];
    try {
      std::vector<MarginalizedVolume> per_camera;
      per_camera.reserve(cfg.cameras.size());
      for (std::size_t ci = 0; ci < cfg.cameras.size(); ++ci) {
        const DenseFeatureLevel& online =
            frame.pyramids[ci].level_for_scale(lc.scale);
        CostVolume vol = build_cost_volume(*nodes[ci], online, running,
                                           cfg.cameras[ci], lc.volume);
        vol = regularize(vol, cfg.regularizer);

        const auto& kps = nodes[ci]->keypoints(lc.scale);
        std::vector<float> weights;
        weights.reserve(kps.size());
        for (const auto& kp : kps) weights.push_back(kp.weight);
        per_camera.push_back(
            marginalize(vol, weights, cfg.marginalization));
      }
      const MarginalizedVolume fused = fuse_cameras(per_camera);
      MarginalDistributions dists =
          marginal_distributions(fused, lc.temperature, cfg.collapse);

      const PoseSE2Offset offset = dists.expected_offset();
      result.offset_per_level[li] = offset;
      result.distributions.push_back(std::move(dists));
      running = apply_offset(running, offset);
    } catch (const MatchingError&) {
      result.failed_level = static_cast<int>(li);
      result.available = false;
      result.level_ms[li] = ms_since(level_start);
      result.estimated_pose = running;
      result.total_ms = ms_since(frame_start);
      return result;
    }
    result.level_ms[li] = ms_since(level_start);
  }

  result.estimated_pose = running;
  result.available = availability(result.distributions.back(), cfg.thresholds);
  result.total_ms = ms_since(frame_start);
  return result;
}

std::vector<LocalizationResult> run_sequence(
    const std::vector<FrameInput>& frames, const Pose3& initial_prior,
    const MapDatabase& db, const PipelineConfig& cfg) {
  if (frames.empty()) throw std::invalid_argument("run_sequence: no frames");

  std::vector<LocalizationResult> results;
  results.reserve(frames.size());
  Pose3 reference = initial_prior;  // last output, or last prior if unavailable
  for (const FrameInput& frame : frames) {
    const Pose3 prior = apply_offset(reference, frame.incremental_motion);
    LocalizationResult res = localize_frame(frame, prior, db, cfg);
    reference = res.available ? res.estimated_pose : prior;
    results.push_back(std::move(res));
  }
  return results;
}

void save_trajectory_csv(const std::vector<std::pair<double, Pose3>>& poses,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write trajectory: " + path.string());
  out << "timestamp,x,y,z,qw,qx,qy,qz\n";
  out.precision(17);
  for (const auto& [t, pose] : poses) {
    const auto& q = pose.orientation;
    out << t << ',' << pose.position.x() << ',' << pose.position.y() << ','
        << pose.position.z() << ',' << q.w() << ',' << q.x() << ',' << q.y()
        << ',' << q.z() << '\n';
  }
}

namespace {

std::vector<std::vector<double>> read_csv_rows(
    const std::filesystem::path& path, std::size_t columns,
    const char* expected_header) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw FormatError(path.string() + ": empty file");
  if (line.rfind(expected_header, 0) != 0)
    throw FormatError(path.string() + ": unexpected header \"" + line + "\"");

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string fieldtext;
    while (std::getline(ss, fieldtext, ',')) {
      try {
        row.push_back(std::stod(fieldtext));
      } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": bad number \"" + fieldtext + "\"");
      }
    }
    if (row.size() != columns)
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        std::to_string(row.size()) + " fields, expected " +
                        std::to_string(columns));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<std::pair<double, Pose3>> load_trajectory_csv(
    const std::filesystem::path& path) {
  std::vector<std::pair<double, Pose3>> out;
  for (const auto& row : read_csv_rows(path, 8, "timestamp,x,y,z,qw")) {
    Pose3 pose;
    pose.position = Eigen::Vector3d(row[1], row[2], row[3]);
    pose.orientation = Eigen::Quaterniond(row[4], row[5], row[6], row[7]);
    if (!pose.is_normalized(1e-6))
      throw FormatError(path.string() + ": quaternion at t=" +
                        std::to_string(row[0]) + " not unit norm");
    out.emplace_back(row[0], pose);
  }
  return out;
}

void save_motion_csv(
    const std::vector<std::pair<double, PoseSE2Offset>>& motions,
    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write motion csv: " + path.string());
  out << "timestamp,dx,dy,dpsi\n";
  out.precision(17);
  for (const auto& [t, m] : motions)
    out << t << ',' << m.dx << ',' << m.dy << ',' << m.dpsi << '\n';
}

std::vector<std::pair<double, PoseSE2Offset>> load_motion_csv(
    const std::filesystem::path& path) {
  std::vector<std::pair<double, PoseSE2Offset>> out;
  for (const auto& row : read_csv_rows(path, 4, "timestamp,dx,dy,dpsi"))
    out.emplace_back(row[0], PoseSE2Offset(row[1], row[2], row[3]));
  return out;
}

}  // namespace vloc
