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
#include <unordered_map>
#include <vector>

#include "vloc/feature_embedding.hpp"
#include "vloc/geometry.hpp"
#include "vloc/keypoint_selection.hpp"
#include "vloc/types.hpp"

namespace vloc {

/// A full-resolution image pixel with a known 3D world coordinate
/// (projected ranging data supplied by the mapping harness).
struct DepthPoint {
  double u = 0.0;  // full-resolution pixels
  double v = 0.0;
  Vec3 world{0.0, 0.0, 0.0};
};

/// One stored keypoint: level-scale pixel position, attention weight,
/// descriptor and 3D world coordinate.
struct MapKeypoint {
  float u = 0.0f;  // level-scale pixels
  float v = 0.0f;
  float weight = 0.0f;  // [0, 1]
  Vec3 world{0.0, 0.0, 0.0};
  Descriptor descriptor = Descriptor::Zero();
};

/// One map image's selected keypoints, grouped per pyramid level.
struct MapNode {
  std::uint64_t node_id = 0;
  Pose3 capture_pose;  // ground-truth vehicle pose at capture
  std::uint16_t camera_id = 0;
  std::array<std::vector<MapKeypoint>, 3> keypoints_by_level;  // scales 2,4,8

  static int level_index(int scale);
  const std::vector<MapKeypoint>& keypoints(int scale) const {
    return keypoints_by_level[level_index(scale)];
  }
};

/// Ordered collection of map nodes with a uniform-grid index over capture
/// positions for nearest-node queries. Immutable once built/loaded apart
/// from add_node.
class MapDatabase {
 public:
  /// Appends a node; node_ids must stay unique (throws MapBuildError).
  void add_node(MapNode node);

  const std::vector<MapNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  /// Node whose capture position is nearest (3D Euclidean) to the query
  /// position; ties resolve to the lowest node_id. Throws QueryError when
  /// empty.
  const MapNode& nearest_node(const Pose3& query) const;

  /// Same, restricted to nodes captured by `camera_id`.
  const MapNode& nearest_node(const Pose3& query, std::uint16_t camera_id) const;

 private:
  friend MapDatabase load_map(const std::filesystem::path&);

  struct CellKey {
    std::int64_t x, y;
    bool operator==(const CellKey&) const = default;
  };
  struct CellHash {
    std::size_t operator()(const CellKey& k) const {
      return std::hash<std::int64_t>()(k.x * 73856093LL ^ k.y * 19349669LL);
    }
  };

  CellKey cell_of(double x, double y) const;
  const MapNode* nearest_filtered(const Pose3& query, bool filter,
                                  std::uint16_t camera_id) const;

  static constexpr double kCellSize = 32.0;  // meters

  std::vector<MapNode> nodes_;
  std::unordered_map<CellKey, std::vector<int>, CellHash> grid_;
};

/// Build one map node from a pyramid and its depth-associated pixels.
/// Candidates are formed only from pixels with known 3D coordinates;
/// attention weights and descriptors are sampled bilinearly from the
/// level. Selection is cfg.strategy (WFPS for map generation) after a
/// random preselection of cfg.k_preselect candidates.
/// Throws MapBuildError when a level ends up with zero candidates.
MapNode build_node(const FeaturePyramid& pyramid,
                   const std::vector<DepthPoint>& depth_points,
                   const Pose3& capture_pose, std::uint16_t camera_id,
                   std::uint64_t node_id, const SelectionConfig& cfg);

/// Persist / restore the database (magic "ALMP"). load_map validates all
/// stored invariants and throws FormatError with the offending record.
void save_map(const MapDatabase& db, const std::filesystem::path& path);
MapDatabase load_map(const std::filesystem::path& path);

}  // namespace vloc
