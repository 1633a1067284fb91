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
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vloc/feature_embedding.hpp"
#include "vloc/geometry.hpp"
#include "vloc/map_store.hpp"

namespace vloc {

/// Search grid around the prior pose: n_x x n_y x n_psi candidate
/// offsets, odd counts so the center node is the zero offset.
struct CostVolumeConfig {
  int n_x = 11;
  int n_y = 11;
  int n_psi = 11;
  double step_x = 0.5;    // meters
  double step_y = 0.5;    // meters
  double step_psi = 0.4 * M_PI / 180.0;  // radians

  double offset_x(int i) const { return (i - (n_x - 1) / 2) * step_x; }
  double offset_y(int j) const { return (j - (n_y - 1) / 2) * step_y; }
  double offset_psi(int k) const { return (k - (n_psi - 1) / 2) * step_psi; }
  int node_count() const { return n_x * n_y * n_psi; }

  /// Throws std::invalid_argument unless counts are odd and >= 3 and
  /// steps are positive.
  void validate() const;
};

/// Per-keypoint matching costs over the candidate grid. `valid` marks
/// (keypoint, node) pairs whose projection landed inside the online
/// level; invalid entries hold zero and are excluded downstream.
struct CostVolume {
  CostVolumeConfig cfg;
  int num_keypoints = 0;
  std::vector<double> raw;      // [p][i][j][k]
  std::vector<std::uint8_t> valid;  // same layout

  std::size_t index(int p, int i, int j, int k) const {
    return ((static_cast<std::size_t>(p) * cfg.n_x + i) * cfg.n_y + j) *
               cfg.n_psi + k;
  }
};

/// Per-node cost regularizer: three affine layers 1->8, 8->8, 8->1 with
/// leaky rectification (slope 0.1) after the first two, applied
/// identically at every (keypoint, node). The default is an exact
/// identity on non-negative costs, so the unweighted pipeline is raw-L2
/// matching.
struct RegularizerWeights {
  Eigen::Matrix<float, 8, 1> w1 = Eigen::Matrix<float, 8, 1>::Zero();
  Eigen::Matrix<float, 8, 1> b1 = Eigen::Matrix<float, 8, 1>::Zero();
  Eigen::Matrix<float, 8, 8> w2 = Eigen::Matrix<float, 8, 8>::Zero();
  Eigen::Matrix<float, 8, 1> b2 = Eigen::Matrix<float, 8, 1>::Zero();
  Eigen::Matrix<float, 1, 8> w3 = Eigen::Matrix<float, 1, 8>::Zero();
  float b3 = 0.0f;

  static constexpr float kLeakySlope = 0.1f;

  static RegularizerWeights identity();

  /// Evaluate the scalar per-node network.
  double apply(double cost) const;

  bool all_finite() const;
};

/// Persist / restore the per-node network (magic "ALRW").
void save_regularizer(const RegularizerWeights& w,
                      const std::filesystem::path& path);
RegularizerWeights load_regularizer(const std::filesystem::path& path);

enum class MarginalizationMode : std::uint8_t {
  kReduceAverage,    // plain mean over valid keypoints
  kWeightedAverage,  // attention-weighted mean over valid keypoints
};

/// Keypoint-marginalized cost grid. A node is unavailable when no
/// keypoint projected in-bounds for it.
struct MarginalizedVolume {
  CostVolumeConfig cfg;
  std::vector<double> cost;           // [i][j][k]
  std::vector<std::uint8_t> available;  // same layout

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * cfg.n_y + j) * cfg.n_psi + k;
  }
  bool any_available() const;
};

/// How the 3D cost grid collapses into the three per-axis probability
/// vectors.
enum class ProbabilityCollapse : std::uint8_t {
  /// Softmax of -cost/T over the whole grid, then sum probabilities over
  /// the other two axes (probability marginalization). Default.
  kSoftmaxThenSum,
  /// Average cost over the other two axes, then softmax the collapsed
  /// per-axis costs. Retained as an alternative head; on large grids it
  /// flattens sharp cost minima (the per-axis gap shrinks with grid
  /// area), so availability thresholds are hard to meet with it.
  kAverageThenSoftmax,
};

struct AxisDistribution {
  std::vector<double> offsets;        // grid coordinates Delta z_i
  std::vector<double> probabilities;  // sums to 1
  double expected = 0.0;              // soft-argmax  sum P_i * Delta z_i
  double variance = 0.0;              // sum P_i * (Delta z_i - expected)^2
};

struct MarginalDistributions {
  AxisDistribution x;
  AxisDistribution y;
  AxisDistribution psi;

  PoseSE2Offset expected_offset() const {
    return PoseSE2Offset(x.expected, y.expected, psi.expected);
  }
};

/// Per-axis variance limits for the availability verdict.
struct AvailabilityThresholds {
  double var_x = 0.01;         // m^2
  double var_y = 0.01;         // m^2
  double var_psi = 3.0461741978670863e-06;  // rad^2

  /// (2 * finest step)^2 per axis.
  static AvailabilityThresholds from_steps(double step_xy, double step_psi);
};

/// Build the pose cost volume: project every map keypoint's world point
/// through apply_offset(prior, grid offset) into the online level; where
/// in-bounds, cost is the L2 distance between the stored descriptor and
/// the bilinear sample, otherwise the (keypoint, node) entry is invalid.
/// Throws MatchingError when the node has no keypoints at the level's
/// scale.
CostVolume build_cost_volume(const MapNode& node,
                             const DenseFeatureLevel& online_level,
                             const Pose3& prior, const CameraModel& cam,
                             const CostVolumeConfig& cfg);

/// Apply the per-node network to every valid cost.
CostVolume regularize(const CostVolume& vol, const RegularizerWeights& w);

/// Collapse the keypoint dimension. `weights` are the per-keypoint
/// attention scores (length = vol.num_keypoints); ignored under
/// kReduceAverage. Nodes where every keypoint is invalid come out
/// unavailable. Accumulation order is fixed (keypoint index order) for
/// bit-reproducibility.
MarginalizedVolume marginalize(const CostVolume& vol,
                               std::span<const float> weights,
                               MarginalizationMode mode);

/// Turn the cost grid into per-axis probability distributions with the
/// soft-argmax expected offset and its variance per axis.
/// Throws MatchingError when every node is unavailable.
MarginalDistributions marginal_distributions(
    const MarginalizedVolume& volume, double temperature,
    ProbabilityCollapse collapse = ProbabilityCollapse::kSoftmaxThenSum);

/// True iff the per-axis variances are all within their thresholds
/// (boundary counts as available).
bool availability(const MarginalDistributions& m,
                  const AvailabilityThresholds& thresholds);

/// Per-keypoint costs at one specific offset (used by the similarity
/// loss at the ground-truth offset). `squared` selects squared L2
/// distances; the regularizer, when given, is applied after. Keypoints
/// projecting out of view are skipped (their slot is omitted).
std::vector<double> keypoint_costs_at_offset(
    const MapNode& node, const DenseFeatureLevel& online_level,
    const Pose3& prior, const PoseSE2Offset& offset, const CameraModel& cam,
    bool squared = false, const RegularizerWeights* regularizer = nullptr);

}  // namespace vloc
