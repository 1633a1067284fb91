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

#include "vloc/keypoint_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vloc/errors.hpp"
#include "vloc/rng.hpp"

namespace vloc {

namespace {

double sq_dist(const Candidate& a, const Candidate& b) {
  const double du = a.u - b.u;
  const double dv = a.v - b.v;
  return du * du + dv * dv;
}

// Greedy max-min selection shared by fps and wfps. Scoring uses squared
// distances for fps (monotone equivalent) and weight * distance for wfps.
std::vector<int> greedy_farthest(const std::vector<Candidate>& candidates,
                                 int n, int seed_index, bool weighted) {
  const int count = static_cast<int>(candidates.size());
  if (count == 0) throw SelectionError("farthest point sampling: no candidates");
  if (n > count)
    throw SelectionError("farthest point sampling: requested " +
                         std::to_string(n) + " of " + std::to_string(count) +
                         " candidates");
  if (seed_index < 0 || seed_index >= count)
    throw SelectionError("farthest point sampling: seed index out of range");

  std::vector<int> selected;
  if (n <= 0) return selected;
  selected.reserve(n);
  selected.push_back(seed_index);

  // Running min squared distance from each candidate to the selected set.
  std::vector<double> min_d2(count);
  std::vector<char> taken(count, 0);
  taken[seed_index] = 1;
  for (int i = 0; i < count; ++i)
    min_d2[i] = sq_dist(candidates[i], candidates[seed_index]);

  for (int step = 1; step < n; ++step) {
    int best = -1;
    double best_score = -1.0;
    for (int i = 0; i < count; ++i) {
      if (taken[i]) continue;
      const double score = weighted
                               ? candidates[i].weight * std::sqrt(min_d2[i])
                               : min_d2[i];
      if (score > best_score) {  // strict: ties keep the lowest index
        best_score = score;
        best = i;
      }
    }
    selected.push_back(best);
    taken[best] = 1;
    for (int i = 0; i < count; ++i) {
      if (taken[i]) continue;
      min_d2[i] = std::min(min_d2[i], sq_dist(candidates[i], candidates[best]));
    }
  }
  return selected;
}

}  // namespace

std::vector<Candidate> preselect(const std::vector<Candidate>& candidates,
                                 int k, std::uint64_t seed) {
  if (candidates.empty())
    throw SelectionError("preselect: empty candidate list");
  const int count = static_cast<int>(candidates.size());
  if (k >= count) return candidates;

  // Partial Fisher-Yates over an index array; the first k slots are the
  // uniform without-replacement draw.
  std::vector<int> indices(count);
  std::iota(indices.begin(), indices.end(), 0);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(uniform_below(rng, count - i));
    std::swap(indices[i], indices[j]);
  }
  std::vector<Candidate> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(candidates[indices[i]]);
  return out;
}

std::vector<int> fps(const std::vector<Candidate>& candidates, int n,
                     std::optional<int> seed_index) {
  return greedy_farthest(candidates, n, seed_index.value_or(0), false);
}

std::vector<int> wfps(const std::vector<Candidate>& candidates, int n,
                      std::optional<int> seed_index) {
  int seed = 0;
  if (seed_index) {
    seed = *seed_index;
  } else {
    double best_w = -1.0;
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
      if (candidates[i].weight > best_w) {
        best_w = candidates[i].weight;
        seed = i;
      }
    }
  }
  return greedy_farthest(candidates, n, seed, true);
}

}  // namespace vloc
