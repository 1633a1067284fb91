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

#include "vloc/losses.hpp"

#include <cmath>

namespace vloc {

double loss_absolute(const PoseSE2Offset& est, const PoseSE2Offset& gt,
                     const LossConfig& cfg) {
  const double rx = est.dx - gt.dx;
  const double ry = est.dy - gt.dy;
  const double rpsi = wrap_angle(est.dpsi - gt.dpsi);
  if (cfg.variant == LossVariant::kMainPaper)
    return cfg.alpha * (std::abs(rx) + std::abs(ry) + std::abs(rpsi));
  return cfg.alpha * (rx * rx + ry * ry) + rpsi * rpsi;
}

namespace {

double axis_mad(const AxisDistribution& axis, double gt, bool angular) {
  double mad = 0.0;
  for (std::size_t i = 0; i < axis.offsets.size(); ++i) {
    const double r = angular ? wrap_angle(axis.offsets[i] - gt)
                             : axis.offsets[i] - gt;
    mad += axis.probabilities[i] * std::abs(r);
  }
  return mad;
}

}  // namespace

double loss_concentration(const MarginalDistributions& m,
                          const PoseSE2Offset& gt, const LossConfig& cfg) {
  return cfg.beta * (axis_mad(m.x, gt.dx, false) + axis_mad(m.y, gt.dy, false) +
                     axis_mad(m.psi, gt.dpsi, true));
}

double loss_similarity(std::span<const double> costs_at_gt,
                       const LossConfig& cfg) {
  double total = 0.0;
  for (double c : costs_at_gt) total += std::max(c - cfg.margin_c, 0.0);
  return total;
}

}  // namespace vloc
