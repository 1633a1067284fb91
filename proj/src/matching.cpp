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

#include "vloc/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "vloc/errors.hpp"
#include "detail/binary_io.hpp"

namespace vloc {

namespace {

constexpr std::uint16_t kRegularizerFormatVersion = 1;
constexpr const char kRegularizerMagic[4] = {'A', 'L', 'R', 'W'};

inline float leaky(float x) {
  return x >= 0.0f ? x : RegularizerWeights::kLeakySlope * x;
}

// Camera-from-world transform cached per candidate pose.
struct CandidateTransform {
  Eigen::Matrix3d rotation;     // camera-from-world
  Eigen::Vector3d translation;  // camera-from-world
};

CandidateTransform camera_from_world(const Pose3& vehicle, const Pose3& extrinsic) {
  const Pose3 cam_world = vehicle.compose(extrinsic);
  CandidateTransform t;
  t.rotation = cam_world.orientation.conjugate().toRotationMatrix();
  t.translation = -(t.rotation * cam_world.position);
  return t;
}

}  // namespace

void CostVolumeConfig::validate() const {
  // Odd so the center node is the zero offset; 1 permits degenerate
  // single-slice axes.
  auto check_count = [](int n, const char* name) {
    if (n < 1 || n % 2 == 0)
      throw std::invalid_argument(std::string("cost volume ") + name +
                                  " must be odd and >= 1, got " +
                                  std::to_string(n));
  };
  check_count(n_x, "n_x");
  check_count(n_y, "n_y");
  check_count(n_psi, "n_psi");
  if (step_x <= 0.0 || step_y <= 0.0 || step_psi <= 0.0)
    throw std::invalid_argument("cost volume steps must be positive");
}

RegularizerWeights RegularizerWeights::identity() {
  // Route the (non-negative) cost through channel 0 of each layer; the
  // rectifier is the identity there.
  RegularizerWeights w;
  w.w1(0, 0) = 1.0f;
  w.w2(0, 0) = 1.0f;
  w.w3(0, 0) = 1.0f;
  return w;
}

double RegularizerWeights::apply(double cost) const {
  Eigen::Matrix<float, 8, 1> h1 = w1 * static_cast<float>(cost) + b1;
  for (int i = 0; i < 8; ++i) h1[i] = leaky(h1[i]);
  Eigen::Matrix<float, 8, 1> h2 = w2 * h1 + b2;
  for (int i = 0; i < 8; ++i) h2[i] = leaky(h2[i]);
  return static_cast<double>((w3 * h2)(0, 0) + b3);
}

bool RegularizerWeights::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() &&
         w3.allFinite() && std::isfinite(b3);
}

void save_regularizer(const RegularizerWeights& w,
                      const std::filesystem::path& path) {
  if (!w.all_finite())
    throw FormatError("save_regularizer: non-finite parameters");
  detail::BinaryWriter out(path);
  out.magic(kRegularizerMagic);
  out.u16(kRegularizerFormatVersion);
  out.u8(3);  // layer count
  auto layer = [&out](const float* weights, int in, int n_out, const float* biases) {
    out.u16(static_cast<std::uint16_t>(in));
    out.u16(static_cast<std::uint16_t>(n_out));
    out.f32_array(weights, static_cast<size_t>(in) * n_out);
    out.f32_array(biases, n_out);
  };
  layer(w.w1.data(), 1, 8, w.b1.data());
  // Eigen default storage is column-major; write row-major explicitly.
  float w2_rm[64];
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) w2_rm[r * 8 + c] = w.w2(r, c);
  layer(w2_rm, 8, 8, w.b2.data());
  layer(w.w3.data(), 8, 1, &w.b3);
  out.commit();
}

RegularizerWeights load_regularizer(const std::filesystem::path& path) {
  detail::BinaryReader r(path);
  r.expect_magic(kRegularizerMagic);
  const auto version = r.u16("version");
  if (version != kRegularizerFormatVersion)
    throw FormatError(path.string() + ": unsupported regularizer version " +
                      std::to_string(version));
  if (r.u8("layer count") != 3)
    throw FormatError(path.string() + ": expected 3 layers");

  auto expect_dims = [&](int in, int n_out, int layer_idx) {
    const int got_in = r.u16("layer input dim");
    const int got_out = r.u16("layer output dim");
    if (got_in != in || got_out != n_out)
      throw FormatError(path.string() + ": layer " + std::to_string(layer_idx) +
                        " dims " + std::to_string(got_in) + "x" +
                        std::to_string(got_out) + ", expected " +
                        std::to_string(in) + "x" + std::to_string(n_out));
  };

  RegularizerWeights w;
  expect_dims(1, 8, 0);
  r.f32_array(w.w1.data(), 8, "layer 0 weights");
  r.f32_array(w.b1.data(), 8, "layer 0 biases");
  expect_dims(8, 8, 1);
  float w2_rm[64];
  r.f32_array(w2_rm, 64, "layer 1 weights");
  for (int row = 0; row < 8; ++row)
    for (int c = 0; c < 8; ++c) w.w2(row, c) = w2_rm[row * 8 + c];
  r.f32_array(w.b2.data(), 8, "layer 1 biases");
  expect_dims(8, 1, 2);
  r.f32_array(w.w3.data(), 8, "layer 2 weights");
  r.f32_array(&w.b3, 1, "layer 2 biases");
  if (!w.all_finite())
    throw FormatError(path.string() + ": non-finite parameters");
  return w;
}

bool MarginalizedVolume::any_available() const {
  return std::any_of(available.begin(), available.end(),
                     [](std::uint8_t a) { return a != 0; });
}

CostVolume build_cost_volume(const MapNode& node,
                             const DenseFeatureLevel& online_level,
                             const Pose3& prior, const CameraModel& cam,
                             const CostVolumeConfig& cfg) {
  cfg.validate();
  const auto& keypoints = node.keypoints(online_level.scale);
  if (keypoints.empty())
    throw MatchingError("build_cost_volume: node " +
                        std::to_string(node.node_id) +
                        " has no keypoints at scale " +
                        std::to_string(online_level.scale));

  CostVolume vol;
  vol.cfg = cfg;
  vol.num_keypoints = static_cast<int>(keypoints.size());
  vol.raw.assign(static_cast<std::size_t>(vol.num_keypoints) * cfg.node_count(),
                 0.0);
  vol.valid.assign(vol.raw.size(), 0);

  // One camera-from-world transform per candidate pose, shared across
  // keypoints; psi is the innermost grid axis but the transform depends
  // on all three offsets, so cache per (i, j, k).
  std::vector<CandidateTransform> transforms;
  transforms.reserve(cfg.node_count());
  for (int i = 0; i < cfg.n_x; ++i)
    for (int j = 0; j < cfg.n_y; ++j)
      for (int k = 0; k < cfg.n_psi; ++k) {
        const PoseSE2Offset offset(cfg.offset_x(i), cfg.offset_y(j),
                                   cfg.offset_psi(k));
        transforms.push_back(
            camera_from_world(apply_offset(prior, offset), cam.extrinsic));
      }

  const double scale = online_level.scale;
  for (int p = 0; p < vol.num_keypoints; ++p) {
    const MapKeypoint& kp = keypoints[p];
    const DescriptorD map_desc = kp.descriptor.cast<double>();
    std::size_t node_idx = 0;
    for (int i = 0; i < cfg.n_x; ++i) {
      for (int j = 0; j < cfg.n_y; ++j) {
        for (int k = 0; k < cfg.n_psi; ++k, ++node_idx) {
          const CandidateTransform& t = transforms[node_idx];
          const Eigen::Vector3d pc = t.rotation * kp.world + t.translation;
          if (pc.z() <= kMinProjectionDepth) continue;
          const double u = cam.fx * pc.x() / pc.z() + cam.cx;
          const double v = cam.fy * pc.y() / pc.z() + cam.cy;
          if (u < 0.0 || u >= cam.width || v < 0.0 || v >= cam.height) continue;
          const double lu = u / scale;
          const double lv = v / scale;
          if (!online_level.in_bounds(lu, lv)) continue;
          const DescriptorD online = bilinear_sample_d(online_level, lu, lv);
          const std::size_t idx = vol.index(p, i, j, k);
          vol.raw[idx] = (map_desc - online).norm();
          vol.valid[idx] = 1;
        }
      }
    }
  }
  return vol;
}

CostVolume regularize(const CostVolume& vol, const RegularizerWeights& w) {
  CostVolume out = vol;
  for (std::size_t i = 0; i < out.raw.size(); ++i)
    if (out.valid[i]) out.raw[i] = w.apply(out.raw[i]);
  return out;
}

MarginalizedVolume marginalize(const CostVolume& vol,
                               std::span<const float> weights,
                               MarginalizationMode mode) {
  if (mode == MarginalizationMode::kWeightedAverage &&
      static_cast<int>(weights.size()) != vol.num_keypoints)
    throw std::invalid_argument(
        "marginalize: weights length " + std::to_string(weights.size()) +
        " != keypoint count " + std::to_string(vol.num_keypoints));

  MarginalizedVolume out;
  out.cfg = vol.cfg;
  const int nodes = vol.cfg.node_count();
  out.cost.assign(nodes, 0.0);
  out.available.assign(nodes, 0);

  for (int n = 0; n < nodes; ++n) {
    double num = 0.0;
    double den = 0.0;
    for (int p = 0; p < vol.num_keypoints; ++p) {
      const std::size_t idx = static_cast<std::size_t>(p) * nodes + n;
      if (!vol.valid[idx]) continue;
      const double w = mode == MarginalizationMode::kWeightedAverage
                           ? static_cast<double>(weights[p])
                           : 1.0;
      num += w * vol.raw[idx];
      den += w;
    }
    if (den > 0.0) {
      out.cost[n] = num / den;
      out.available[n] = 1;
    } else if (mode == MarginalizationMode::kWeightedAverage) {
      // All in-view weights zero: fall back to the plain mean so the node
      // stays usable.
      int count = 0;
      double sum = 0.0;
      for (int p = 0; p < vol.num_keypoints; ++p) {
        const std::size_t idx = static_cast<std::size_t>(p) * nodes + n;
        if (!vol.valid[idx]) continue;
        sum += vol.raw[idx];
        ++count;
      }
      if (count > 0) {
        out.cost[n] = sum / count;
        out.available[n] = 1;
      }
    }
  }
  return out;
}

namespace {

AxisDistribution finalize_axis(std::vector<double> offsets,
                               std::vector<double> probabilities) {
  AxisDistribution axis;
  axis.offsets = std::move(offsets);
  axis.probabilities = std::move(probabilities);
  double total = 0.0;
  for (double p : axis.probabilities) total += p;
  if (total > 0.0)
    for (double& p : axis.probabilities) p /= total;
  for (std::size_t i = 0; i < axis.offsets.size(); ++i)
    axis.expected += axis.probabilities[i] * axis.offsets[i];
  for (std::size_t i = 0; i < axis.offsets.size(); ++i) {
    const double d = axis.offsets[i] - axis.expected;
    axis.variance += axis.probabilities[i] * d * d;
  }
  return axis;
}

}  // namespace

MarginalDistributions marginal_distributions(const MarginalizedVolume& volume,
                                             double temperature,
                                             ProbabilityCollapse collapse) {
  if (temperature <= 0.0)
    throw std::invalid_argument("marginal_distributions: temperature must be > 0");
  if (!volume.any_available())
    throw MatchingError("marginal_distributions: every node unavailable");

  const CostVolumeConfig& cfg = volume.cfg;
  std::vector<double> grid_x(cfg.n_x), grid_y(cfg.n_y), grid_psi(cfg.n_psi);
  for (int i = 0; i < cfg.n_x; ++i) grid_x[i] = cfg.offset_x(i);
  for (int j = 0; j < cfg.n_y; ++j) grid_y[j] = cfg.offset_y(j);
  for (int k = 0; k < cfg.n_psi; ++k) grid_psi[k] = cfg.offset_psi(k);

  std::vector<double> px(cfg.n_x, 0.0), py(cfg.n_y, 0.0), ppsi(cfg.n_psi, 0.0);

  if (collapse == ProbabilityCollapse::kSoftmaxThenSum) {
    // Joint softmax of -cost/T over available nodes, then per-axis sums.
    double best = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < cfg.node_count(); ++n)
      if (volume.available[n]) best = std::max(best, -volume.cost[n] / temperature);
    for (int i = 0; i < cfg.n_x; ++i)
      for (int j = 0; j < cfg.n_y; ++j)
        for (int k = 0; k < cfg.n_psi; ++k) {
          const std::size_t idx = volume.index(i, j, k);
          if (!volume.available[idx]) continue;
          const double p = std::exp(-volume.cost[idx] / temperature - best);
          px[i] += p;
          py[j] += p;
          ppsi[k] += p;
        }
  } else {
    // Collapse the other two axes by averaging available costs, then
    // softmax each axis independently.
    auto axis_probs = [&](int count, auto cost_of_slice) {
      std::vector<double> mean(count);
      std::vector<bool> has(count, false);
      for (int s = 0; s < count; ++s) {
        double sum = 0.0;
        int n = 0;
        cost_of_slice(s, sum, n);
        if (n > 0) {
          mean[s] = sum / n;
          has[s] = true;
        }
      }
      double best = -std::numeric_limits<double>::infinity();
      for (int s = 0; s < count; ++s)
        if (has[s]) best = std::max(best, -mean[s] / temperature);
      std::vector<double> probs(count, 0.0);
      for (int s = 0; s < count; ++s)
        if (has[s]) probs[s] = std::exp(-mean[s] / temperature - best);
      return probs;
    };
    px = axis_probs(cfg.n_x, [&](int i, double& sum, int& n) {
      for (int j = 0; j < cfg.n_y; ++j)
        for (int k = 0; k < cfg.n_psi; ++k) {
          const std::size_t idx = volume.index(i, j, k);
          if (volume.available[idx]) { sum += volume.cost[idx]; ++n; }
        }
    });
    py = axis_probs(cfg.n_y, [&](int j, double& sum, int& n) {
      for (int i = 0; i < cfg.n_x; ++i)
        for (int k = 0; k < cfg.n_psi; ++k) {
          const std::size_t idx = volume.index(i, j, k);
          if (volume.available[idx]) { sum += volume.cost[idx]; ++n; }
        }
    });
    ppsi = axis_probs(cfg.n_psi, [&](int k, double& sum, int& n) {
      for (int i = 0; i < cfg.n_x; ++i)
        for (int j = 0; j < cfg.n_y; ++j) {
          const std::size_t idx = volume.index(i, j, k);
          if (volume.available[idx]) { sum += volume.cost[idx]; ++n; }
        }
    });
  }

  MarginalDistributions m;
  m.x = finalize_axis(std::move(grid_x), std::move(px));
  m.y = finalize_axis(std::move(grid_y), std::move(py));
  m.psi = finalize_axis(std::move(grid_psi), std::move(ppsi));
  return m;
}

AvailabilityThresholds AvailabilityThresholds::from_steps(double step_xy,
                                                          double step_psi) {
  AvailabilityThresholds t;
  t.var_x = (2.0 * step_xy) * (2.0 * step_xy);
  t.var_y = t.var_x;
  t.var_psi = (2.0 * step_psi) * (2.0 * step_psi);
  return t;
}

bool availability(const MarginalDistributions& m,
                  const AvailabilityThresholds& thresholds) {
  return m.x.variance <= thresholds.var_x && m.y.variance <= thresholds.var_y &&
         m.psi.variance <= thresholds.var_psi;
}

std::vector<double> keypoint_costs_at_offset(
    const MapNode& node, const DenseFeatureLevel& online_level,
    const Pose3& prior, const PoseSE2Offset& offset, const CameraModel& cam,
    bool squared, const RegularizerWeights* regularizer) {
  const auto& keypoints = node.keypoints(online_level.scale);
  const CandidateTransform t =
      camera_from_world(apply_offset(prior, offset), cam.extrinsic);
  std::vector<double> costs;
  costs.reserve(keypoints.size());
  for (const MapKeypoint& kp : keypoints) {
    const Eigen::Vector3d pc = t.rotation * kp.world + t.translation;
    if (pc.z() <= kMinProjectionDepth) continue;
    const double u = cam.fx * pc.x() / pc.z() + cam.cx;
    const double v = cam.fy * pc.y() / pc.z() + cam.cy;
    if (u < 0.0 || u >= cam.width || v < 0.0 || v >= cam.height) continue;
    const double lu = u / online_level.scale;
    const double lv = v / online_level.scale;
    if (!online_level.in_bounds(lu, lv)) continue;
    const DescriptorD online = bilinear_sample_d(online_level, lu, lv);
    double c = (kp.descriptor.cast<double>() - online).norm();
    if (squared) c = c * c;
    if (regularizer) c = regularizer->apply(c);
    costs.push_back(c);
  }
  return costs;
}

}  // namespace vloc
