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
#include <span>

#include "vloc/geometry.hpp"
#include "vloc/matching.hpp"

namespace vloc {

/// The two published functional forms of the offset loss. They differ in
/// shape (absolute vs squared residuals) and in the balancing factor's
/// scope (all three axes vs x, y only); both are kept behind this
/// selector.
enum class LossVariant : std::uint8_t { kMainPaper, kSupplement };

/// Which costs feed the similarity margin: the regularized per-node
/// output, or the raw squared descriptor distance. Informational for
/// callers of keypoint_costs_at_offset; the margin itself is identical.
enum class SimilarityCostKind : std::uint8_t { kRegularized, kRawSquared };

struct LossConfig {
  double alpha = 1.0;  // balancing factor on the offset loss
  double beta = 1.0;   // concentration factor
  double margin_c = 1.0;  // similarity margin C
  LossVariant variant = LossVariant::kMainPaper;
  SimilarityCostKind similarity_kind = SimilarityCostKind::kRegularized;
};

/// Offset loss between the estimate and the ground truth.
/// kMainPaper:  alpha * (|dx| + |dy| + |dpsi|)  (residuals, psi wrapped)
/// kSupplement: alpha * (dx^2 + dy^2) + dpsi^2
double loss_absolute(const PoseSE2Offset& est, const PoseSE2Offset& gt,
                     const LossConfig& cfg);

/// Concentration loss: beta * (sigma_x + sigma_y + sigma_psi), where
/// sigma_z is the mean absolute deviation of P(dz_i) about the
/// ground-truth offset (angle residuals wrapped).
double loss_concentration(const MarginalDistributions& m,
                          const PoseSE2Offset& gt, const LossConfig& cfg);

/// Similarity margin over per-keypoint costs evaluated at the
/// ground-truth projection: sum_p max(cost_p - C, 0). An empty list is a
/// vacuous zero.
double loss_similarity(std::span<const double> costs_at_gt,
                       const LossConfig& cfg);

}  // namespace vloc
