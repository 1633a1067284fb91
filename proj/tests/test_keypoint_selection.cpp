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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "vloc/errors.hpp"
#include "vloc/keypoint_selection.hpp"
#include "vloc/rng.hpp"

using namespace vloc;

namespace {

// Independent greedy oracle: recomputes every min-distance from scratch
// each step (no incremental caching), scoring w * d or plain d.
std::vector<int> oracle_greedy(const std::vector<Candidate>& c, int n,
                               int seed, bool weighted) {
  std::vector<int> sel = {seed};
  std::set<int> taken = {seed};
  while (static_cast<int>(sel.size()) < n) {
    int best = -1;
    double best_score = -1.0;
    for (int i = 0; i < static_cast<int>(c.size()); ++i) {
      if (taken.count(i)) continue;
      double min_d = std::numeric_limits<double>::infinity();
      for (int s : sel)
        min_d = std::min(min_d, std::hypot(c[i].u - c[s].u, c[i].v - c[s].v));
      const double score = weighted ? c[i].weight * min_d : min_d;
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    sel.push_back(best);
    taken.insert(best);
  }
  return sel;
}

std::vector<Candidate> random_candidates(int count, std::mt19937_64& rng,
                                         bool random_weights) {
  std::vector<Candidate> c(count);
  for (auto& cand : c) {
    cand.u = uniform_range(rng, 0.0, 100.0);
    cand.v = uniform_range(rng, 0.0, 100.0);
    cand.weight = random_weights ? uniform_unit(rng) : 1.0;
  }
  return c;
}

}  // namespace

TEST_CASE("preselect basics") {
  std::vector<Candidate> c(8);
  for (int i = 0; i < 8; ++i) c[i].u = i;

  CHECK_THROWS_AS((void)preselect({}, 3, 0), SelectionError);

  // k >= size returns everything in input order.
  const auto all = preselect(c, 8, 123);
  REQUIRE(all.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(all[i].u == doctest::Approx(c[i].u));

  // Deterministic under the seed, distinct picks.
  const auto a = preselect(c, 4, 99);
  const auto b = preselect(c, 4, 99);
  REQUIRE(a.size() == 4);
  std::set<double> seen;
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].u == doctest::Approx(b[i].u));
    seen.insert(a[i].u);
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("preselect is uniform: binomial frequency over 10000 seeds") {
  std::vector<Candidate> c(10);
  for (int i = 0; i < 10; ++i) c[i].u = i;

  std::array<int, 10> hits = {};
  const int trials = 10000;
  for (int seed = 0; seed < trials; ++seed) {
    for (const Candidate& picked : preselect(c, 5, seed))
      ++hits[static_cast<int>(picked.u)];
  }
  // Each candidate is a Bernoulli(0.5) per trial: 5000 +- 3*sqrt(2500).
  const double sigma = std::sqrt(trials * 0.5 * 0.5);
  for (int i = 0; i < 10; ++i) {
    CHECK(hits[i] > 5000 - 3 * sigma);
    CHECK(hits[i] < 5000 + 3 * sigma);
  }
}

TEST_CASE("fps on collinear points") {
  std::vector<Candidate> c(11);
  for (int i = 0; i <= 10; ++i) c[i].u = i;

  CHECK(fps(c, 1, 0) == std::vector<int>{0});

  const auto picked = fps(c, 3, 0);
  REQUIRE(picked.size() == 3);
  CHECK(picked[0] == 0);
  CHECK(picked[1] == 10);  // farthest from 0
  CHECK(picked[2] == 5);   // max min-distance to {0, 10}
  CHECK(picked == oracle_greedy(c, 3, 0, false));

  CHECK_THROWS_AS((void)fps(c, 12), SelectionError);
  CHECK_THROWS_AS((void)fps({}, 1), SelectionError);
}

TEST_CASE("fps tie-break on coincident points is index order") {
  std::vector<Candidate> c(5);  // all at the origin
  const auto picked = fps(c, 4, 0);
  CHECK(picked == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("wfps equals fps under uniform weights, any scale") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = random_candidates(40, rng, false);
    const int n = 1 + static_cast<int>(uniform_below(rng, 39));
    const auto plain = fps(c, n);
    CHECK(wfps(c, n) == plain);

    for (auto& cand : c) cand.weight = 0.37;  // argmax invariant to scale
    CHECK(wfps(c, n) == plain);
  }
}

TEST_CASE("wfps all-zero weights degenerates to index order after the seed") {
  std::vector<Candidate> c(6);
  for (int i = 0; i < 6; ++i) {
    c[i].u = 10.0 * i;
    c[i].weight = 0.0;
  }
  const auto picked = wfps(c, 4);
  CHECK(picked == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("wfps prefers the heavy cluster: two-cluster oracle check") {
  // Cluster A at u ~ 0 weighted 1.0; cluster B at u ~ 100 weighted 0.1.
  std::vector<Candidate> c;
  for (int i = 0; i < 6; ++i) {
    Candidate heavy;
    heavy.u = 0.0 + i;
    heavy.v = i % 2;
    heavy.weight = 1.0;
    c.push_back(heavy);
  }
  for (int i = 0; i < 6; ++i) {
    Candidate light;
    light.u = 100.0 + i;
    light.v = i % 2;
    light.weight = 0.1;
    c.push_back(light);
  }
  const auto picked = wfps(c, 4);
  CHECK(picked == oracle_greedy(c, 4, 0, true));
}

TEST_CASE("fps/wfps match the brute-force oracle on random instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int count = 2 + static_cast<int>(uniform_below(rng, 199));
    const auto c = random_candidates(count, rng, true);
    const int n = 1 + static_cast<int>(uniform_below(rng, count));
    const int seed = static_cast<int>(uniform_below(rng, count));
    CHECK(fps(c, n, seed) == oracle_greedy(c, n, seed, false));
    CHECK(wfps(c, n, seed) == oracle_greedy(c, n, seed, true));
  }
}

TEST_CASE("selected indices are unique and in range") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_candidates(60, rng, true);
    const auto picked = wfps(c, 25);
    std::set<int> unique(picked.begin(), picked.end());
    CHECK(unique.size() == picked.size());
    for (int idx : picked) {
      CHECK(idx >= 0);
      CHECK(idx < 60);
    }
  }
}

TEST_CASE("fps spreads better than random subsets (min pairwise distance)") {
  std::mt19937_64 rng(31);
  auto min_pairwise = [](const std::vector<Candidate>& c,
                         const std::vector<int>& idx) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < idx.size(); ++i)
      for (size_t j = i + 1; j < idx.size(); ++j)
        best = std::min(best, std::hypot(c[idx[i]].u - c[idx[j]].u,
                                         c[idx[i]].v - c[idx[j]].v));
    return best;
  };

  int fps_wins = 0;
  const int trials = 40;
  for (int trial = 0; trial < trials; ++trial) {
    const auto c = random_candidates(120, rng, false);
    const auto fps_sel = fps(c, 12);
    const double fps_spread = min_pairwise(c, fps_sel);

    double random_spread = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<int> idx(120);
      std::iota(idx.begin(), idx.end(), 0);
      for (int i = 0; i < 12; ++i)
        std::swap(idx[i], idx[i + uniform_below(rng, 120 - i)]);
      idx.resize(12);
      random_spread = std::max(random_spread, min_pairwise(c, idx));
    }
    if (fps_spread >= random_spread) ++fps_wins;
  }
  CHECK(fps_wins >= trials * 9 / 10);
}
