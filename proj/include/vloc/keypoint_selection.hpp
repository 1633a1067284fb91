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
#include <optional>
#include <vector>

#include "vloc/types.hpp"

namespace vloc {

/// A selectable 2D point with its attention weight and known 3D world
/// coordinate. Coordinates are in the owning pyramid level's pixel scale.
struct Candidate {
  double u = 0.0;
  double v = 0.0;
  double weight = 0.0;  // attention score in [0, 1]
  Vec3 world{0.0, 0.0, 0.0};
};

enum class SelectionStrategy : std::uint8_t { kFps, kWfps };

/// Keypoint selection parameters. Counts exceeding what is actually
/// available are clamped (with a warning on stderr).
struct SelectionConfig {
  int k_preselect = 1024;
  std::array<int, 3> n_per_level = {128, 128, 128};  // scales 2, 4, 8
  std::uint64_t rng_seed = 0;
  SelectionStrategy strategy = SelectionStrategy::kWfps;
};

/// Draw k distinct candidates uniformly without replacement,
/// deterministically for a given seed. Returns everything (input order)
/// when k >= size. Throws SelectionError on an empty candidate list.
std::vector<Candidate> preselect(const std::vector<Candidate>& candidates,
                                 int k, std::uint64_t seed);

/// Farthest point sampling: greedily pick the candidate maximizing the
/// minimum (u, v) distance to the already-selected set. Ties break toward
/// the lowest candidate index. The seed point defaults to index 0.
/// Returns indices into `candidates`. Throws SelectionError when
/// n > candidates.size() or the list is empty.
std::vector<int> fps(const std::vector<Candidate>& candidates, int n,
                     std::optional<int> seed_index = std::nullopt);

/// Weighted FPS: each step maximizes weight(q) * min distance to the
/// selected set. With all weights equal this reduces to fps(). All-zero
/// weights degenerate to index order via the tie-break. The seed point
/// defaults to the highest-weight candidate (lowest index on ties).
std::vector<int> wfps(const std::vector<Candidate>& candidates, int n,
                      std::optional<int> seed_index = std::nullopt);

}  // namespace vloc
