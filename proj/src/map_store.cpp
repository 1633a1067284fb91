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

#include "vloc/map_store.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>
#include <string>

#include "vloc/errors.hpp"
#include "vloc/rng.hpp"
#include "detail/binary_io.hpp"

namespace vloc {

namespace {

constexpr std::uint16_t kMapFormatVersion = 1;
constexpr const char kMapMagic[4] = {'A', 'L', 'M', 'P'};

}  // namespace

int MapNode::level_index(int scale) {
  switch (scale) {
    case 2: return 0;
    case 4: return 1;
    case 8: return 2;
    default:
      throw std::invalid_argument("invalid pyramid scale " +
                                  std::to_string(scale));
  }
}

void MapDatabase::add_node(MapNode node) {
  for (const auto& existing : nodes_)
    if (existing.node_id == node.node_id)
      throw MapBuildError("duplicate node_id " + std::to_string(node.node_id));
  const int idx = static_cast<int>(nodes_.size());
  grid_[cell_of(node.capture_pose.position.x(), node.capture_pose.position.y())]
      .push_back(idx);
  nodes_.push_back(std::move(node));
}

MapDatabase::CellKey MapDatabase::cell_of(double x, double y) const {
  return CellKey{static_cast<std::int64_t>(std::floor(x / kCellSize)),
                 static_cast<std::int64_t>(std::floor(y / kCellSize))};
}

const MapNode* MapDatabase::nearest_filtered(const Pose3& query, bool filter,
                                             std::uint16_t camera_id) const {
  const Eigen::Vector3d q = query.position;
  const CellKey center = cell_of(q.x(), q.y());

  // Occupied cells sorted by Chebyshev ring distance from the query cell.
  // A cell at ring r cannot hold a point closer than (r-1)*kCellSize, so
  // the scan stops once that bound strictly exceeds the best distance
  // (strict: equal distances must still be compared for the id tie-break).
  struct RankedCell {
    std::int64_t ring;
    const std::vector<int>* indices;
  };
  std::vector<RankedCell> cells;
  cells.reserve(grid_.size());
  for (const auto& [key, indices] : grid_) {
    const std::int64_t ring =
        std::max(std::llabs(key.x - center.x), std::llabs(key.y - center.y));
    cells.push_back(RankedCell{ring, &indices});
  }
  std::sort(cells.begin(), cells.end(),
            [](const RankedCell& a, const RankedCell& b) { return a.ring < b.ring; });

  const MapNode* best = nullptr;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (const RankedCell& cell : cells) {
    if (best) {
      const double bound = (static_cast<double>(cell.ring) - 1.0) * kCellSize;
      if (bound > 0.0 && bound * bound > best_d2) break;
    }
    for (int idx : *cell.indices) {
      const MapNode& node = nodes_[idx];
      if (filter && node.camera_id != camera_id) continue;
      const double d2 = (node.capture_pose.position - q).squaredNorm();
      if (d2 < best_d2 ||
          (d2 == best_d2 && best && node.node_id < best->node_id)) {
        best_d2 = d2;
        best = &node;
      }
    }
  }
  return best;
}

const MapNode& MapDatabase::nearest_node(const Pose3& query) const {
  if (nodes_.empty()) throw QueryError("nearest_node on empty map database");
  return *nearest_filtered(query, false, 0);
}

const MapNode& MapDatabase::nearest_node(const Pose3& query,
                                         std::uint16_t camera_id) const {
  if (nodes_.empty()) throw QueryError("nearest_node on empty map database");
  const MapNode* best = nearest_filtered(query, true, camera_id);
  if (!best)
    throw QueryError("no map node for camera_id " + std::to_string(camera_id));
  return *best;
}

MapNode build_node(const FeaturePyramid& pyramid,
                   const std::vector<DepthPoint>& depth_points,
                   const Pose3& capture_pose, std::uint16_t camera_id,
                   std::uint64_t node_id, const SelectionConfig& cfg) {
  if (depth_points.empty())
    throw MapBuildError("build_node " + std::to_string(node_id) +
                        ": no depth-associated pixels");

  MapNode node;
  node.node_id = node_id;
  node.capture_pose = capture_pose;
  node.camera_id = camera_id;

  for (size_t li = 0; li < kPyramidScales.size(); ++li) {
    const int scale = kPyramidScales[li];
    const DenseFeatureLevel& level = pyramid.levels[li];

    std::vector<Candidate> candidates;
    candidates.reserve(depth_points.size());
    for (const DepthPoint& dp : depth_points) {
      const double lu = dp.u / scale;
      const double lv = dp.v / scale;
      if (!level.in_bounds(lu, lv)) continue;  // level border cut by flooring
      Candidate c;
      c.u = lu;
      c.v = lv;
      c.weight = bilinear_sample_heat(level, lu, lv);
      c.world = dp.world;
      candidates.push_back(c);
    }
    if (candidates.empty())
      throw MapBuildError("build_node " + std::to_string(node_id) +
                          ": no candidates at level scale " +
                          std::to_string(scale));

    int k = cfg.k_preselect;
    if (k < cfg.n_per_level[li]) {
      std::cerr << "[vloc] warning: k_preselect " << k
                << " below keypoint count, clamping up\n";
      k = cfg.n_per_level[li];
    }
    const std::uint64_t seed =
        split_seed(cfg.rng_seed, node_id * 8 + li * 2 + camera_id);
    std::vector<Candidate> pool = preselect(candidates, k, seed);

    int n = cfg.n_per_level[li];
    if (n > static_cast<int>(pool.size())) {
      n = static_cast<int>(pool.size());
    }
    const std::vector<int> picked = cfg.strategy == SelectionStrategy::kWfps
                                        ? wfps(pool, n)
                                        : fps(pool, n);

    auto& kps = node.keypoints_by_level[li];
    kps.reserve(picked.size());
    for (int idx : picked) {
      const Candidate& c = pool[idx];
      MapKeypoint kp;
      kp.u = static_cast<float>(c.u);
      kp.v = static_cast<float>(c.v);
      kp.weight = static_cast<float>(c.weight);
      kp.world = c.world;
      kp.descriptor = bilinear_sample(level, c.u, c.v);
      kps.push_back(kp);
    }
  }
  return node;
}

void save_map(const MapDatabase& db, const std::filesystem::path& path) {
  detail::BinaryWriter w(path);
  w.magic(kMapMagic);
  w.u16(kMapFormatVersion);
  w.u32(static_cast<std::uint32_t>(db.size()));
  for (const MapNode& node : db.nodes()) {
    w.u64(node.node_id);
    w.f64(node.capture_pose.position.x());
    w.f64(node.capture_pose.position.y());
    w.f64(node.capture_pose.position.z());
    w.f64(node.capture_pose.orientation.w());
    w.f64(node.capture_pose.orientation.x());
    w.f64(node.capture_pose.orientation.y());
    w.f64(node.capture_pose.orientation.z());
    w.u16(node.camera_id);
    for (size_t li = 0; li < kPyramidScales.size(); ++li) {
      const auto& kps = node.keypoints_by_level[li];
      w.u8(static_cast<std::uint8_t>(kPyramidScales[li]));
      w.u16(static_cast<std::uint16_t>(kps.size()));
      for (const MapKeypoint& kp : kps) {
        w.f32(kp.u);
        w.f32(kp.v);
        w.f32(kp.weight);
        w.f64(kp.world.x());
        w.f64(kp.world.y());
        w.f64(kp.world.z());
        w.f32_array(kp.descriptor.data(), kDescriptorDim);
      }
    }
  }
  w.commit();
}

MapDatabase load_map(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic(kMapMagic);
  const auto version = r.u16("version");
  if (version != kMapFormatVersion)
    throw FormatError(path.string() + ": unsupported map version " +
                      std::to_string(version));

  MapDatabase db;
  const std::uint32_t count = r.u32("node count");
  std::set<std::uint64_t> seen_ids;
  for (std::uint32_t ni = 0; ni < count; ++ni) {
    const std::string where = path.string() + ": node record " + std::to_string(ni);
    try {
    MapNode node;
    node.node_id = r.u64("node_id");
    if (!seen_ids.insert(node.node_id).second)
      throw FormatError(where + ": duplicate node_id " +
                        std::to_string(node.node_id));
    node.capture_pose.position.x() = r.f64("position");
    node.capture_pose.position.y() = r.f64("position");
    node.capture_pose.position.z() = r.f64("position");
    const double qw = r.f64("quaternion");
    const double qx = r.f64("quaternion");
    const double qy = r.f64("quaternion");
    const double qz = r.f64("quaternion");
    node.capture_pose.orientation = Eigen::Quaterniond(qw, qx, qy, qz);
    if (!node.capture_pose.is_normalized(1e-6))
      throw FormatError(where + ": capture pose quaternion not unit norm");
    node.camera_id = r.u16("camera_id");

    for (size_t li = 0; li < kPyramidScales.size(); ++li) {
      const int scale = r.u8("level scale");
      if (scale != kPyramidScales[li])
        throw FormatError(where + ": level scale " + std::to_string(scale) +
                          ", expected " + std::to_string(kPyramidScales[li]));
      const std::uint16_t n = r.u16("keypoint count");
      auto& kps = node.keypoints_by_level[li];
      kps.resize(n);
      for (std::uint16_t ki = 0; ki < n; ++ki) {
        MapKeypoint& kp = kps[ki];
        kp.u = r.f32("keypoint u");
        kp.v = r.f32("keypoint v");
        kp.weight = r.f32("keypoint weight");
        kp.world.x() = r.f64("keypoint world");
        kp.world.y() = r.f64("keypoint world");
        kp.world.z() = r.f64("keypoint world");
        r.f32_array(kp.descriptor.data(), kDescriptorDim, "keypoint descriptor");

        const std::string kwhere =
            where + ", level " + std::to_string(li) + ", keypoint " +
            std::to_string(ki);
        if (!(kp.weight >= 0.0f && kp.weight <= 1.0f))
          throw FormatError(kwhere + ": weight " + std::to_string(kp.weight) +
                            " outside [0, 1]");
        if (!kp.world.allFinite())
          throw FormatError(kwhere + ": world coordinate not finite");
        if (!kp.descriptor.allFinite())
          throw FormatError(kwhere + ": descriptor not finite");
      }
    }
    db.add_node(std::move(node));
    } catch (const FormatError& e) {
      const std::string msg = e.what();
      if (msg.find("node record") != std::string::npos) throw;
      throw FormatError(where + ": " + msg);
    }
  }
  return db;
}

}  // namespace vloc
