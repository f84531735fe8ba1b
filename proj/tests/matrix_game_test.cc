// Copyright 2026 The stackeq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "stackeq/common.h"
#include "stackeq/matrix_game.h"

namespace stackeq {
namespace {

MatrixGame Make(const std::vector<std::vector<double>>& u1,
                const std::vector<std::vector<double>>& u2) {
  MatrixGame g;
  g.u1.resize(u1.size(), u1[0].size());
  g.u2.resize(u1.size(), u1[0].size());
  for (size_t i = 0; i < u1.size(); ++i) {
    for (size_t j = 0; j < u1[0].size(); ++j) {
      g.u1(i, j) = u1[i][j];
      g.u2(i, j) = u2[i][j];
    }
  }
  return g;
}

// Reference solver: independent exhaustive scan, no shared code path with
// SolveStackelberg's best-response helper.
StackelbergSolution BruteForceStackelberg(const MatrixGame& g) {
  StackelbergSolution best;
  bool have = false;
  for (int i = 0; i < g.NumLeaderActions(); ++i) {
    // Follower's best reply set, then leader-favorable then lowest index.
    double fmax = g.u2.row(i).maxCoeff();
    int j_star = -1;
    for (int j = 0; j < g.NumFollowerActions(); ++j) {
      if (g.u2(i, j) != fmax) continue;
      if (j_star < 0 || g.u1(i, j) > g.u1(i, j_star)) j_star = j;
    }
    if (!have || g.u1(i, j_star) > best.leader_payoff) {
      best = {i, j_star, g.u1(i, j_star), g.u2(i, j_star)};
      have = true;
    }
  }
  return best;
}

TEST_CASE("escape game solutions") {
  const MatrixGame g = EscapeGame();
  const StackelbergSolution se = SolveStackelberg(g);
  CHECK(se.leader_action == 2);
  CHECK(se.follower_action == 2);
  CHECK(se.leader_payoff == 30.0);
  CHECK(se.follower_payoff == 30.0);

  const PureNashSet nash = EnumeratePureNash(g);
  REQUIRE(nash.points.size() == 2);
  CHECK(nash.points[0] == std::pair<int, int>(0, 0));
  CHECK(nash.points[1] == std::pair<int, int>(2, 2));

  CHECK(CooperationLevel(g) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("maintain game solutions") {
  const MatrixGame g = MaintainGame();
  const StackelbergSolution se = SolveStackelberg(g);
  CHECK(se.leader_action == 0);
  CHECK(se.follower_action == 0);
  CHECK(se.leader_payoff == 20.0);
  CHECK(se.follower_payoff == 15.0);

  const PureNashSet nash = EnumeratePureNash(g);
  REQUIRE(nash.points.size() == 2);
  CHECK(nash.points[0] == std::pair<int, int>(1, 1));
  CHECK(nash.points[1] == std::pair<int, int>(2, 2));
}

TEST_CASE("follower ties break in the leader's favor, then lowest index") {
  // Follower indifferent across the row; leader prefers column 2.
  const MatrixGame g = Make({{1, 5, 9}}, {{7, 7, 7}});
  CHECK(BestResponse(g, 0) == 2);
  // Leader also indifferent: lowest index wins.
  const MatrixGame tie = Make({{4, 4, 4}}, {{7, 7, 7}});
  CHECK(BestResponse(tie, 0) == 0);
}

TEST_CASE("leader ties break by lowest index") {
  const MatrixGame g = Make({{3, 0}, {3, 0}}, {{1, 0}, {1, 0}});
  const StackelbergSolution se = SolveStackelberg(g);
  CHECK(se.leader_action == 0);
  CHECK(se.follower_action == 0);
}

TEST_CASE("minimax security value") {
  // Row minima: 1, 0, 2 -> action 2.
  const MatrixGame g =
      Make({{1, 6}, {9, 0}, {2, 3}}, {{0, 0}, {0, 0}, {0, 0}});
  const auto [action, value] = SolveMinimax(g);
  CHECK(action == 2);
  CHECK(value == 2.0);
}

TEST_CASE("cooperation level of a zero-sum game is -1") {
  auto rng = MakeRng(11);
  MatrixGame g = SampleRandomGame(4, 0.0, rng);
  g.u2 = -g.u1;
  CHECK(CooperationLevel(g) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("cooperation level throws on a constant matrix") {
  const MatrixGame g = Make({{1, 1}, {1, 1}}, {{1, 2}, {3, 4}});
  CHECK_THROWS_AS(CooperationLevel(g), std::domain_error);
}

TEST_CASE("validate rejects malformed games") {
  MatrixGame g;
  CHECK_THROWS_AS(g.Validate(), std::invalid_argument);
  g = Make({{1, 2}}, {{1, 2}});
  g.u2.resize(2, 1);
  CHECK_THROWS_AS(g.Validate(), std::invalid_argument);
  g = Make({{1, 2}}, {{1, 2}});
  g.u1(0, 0) = std::nan("");
  CHECK_THROWS_AS(g.Validate(), std::invalid_argument);
}

TEST_CASE("nash enumeration agrees with the double-loop definition") {
  auto rng = MakeRng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const MatrixGame g = SampleRandomGame(2 + trial % 5, 0.3, rng);
    const PureNashSet nash = EnumeratePureNash(g);
    std::set<std::pair<int, int>> got(nash.points.begin(), nash.points.end());
    for (int i = 0; i < g.NumLeaderActions(); ++i) {
      for (int j = 0; j < g.NumFollowerActions(); ++j) {
        bool strict_ne = true;
        for (int k = 0; k < g.NumLeaderActions(); ++k) {
          if (k != i && g.u1(k, j) >= g.u1(i, j)) strict_ne = false;
        }
        for (int l = 0; l < g.NumFollowerActions(); ++l) {
          if (l != j && g.u2(i, l) >= g.u2(i, j)) strict_ne = false;
        }
        CHECK(got.count({i, j}) == (strict_ne ? 1 : 0));
      }
    }
  }
}

TEST_CASE("stackelberg matches brute force on random games") {
  auto rng = MakeRng(43);
  for (int trial = 0; trial < 1000; ++trial) {
    const MatrixGame g = SampleRandomGame(2 + trial % 6, -0.4, rng);
    const StackelbergSolution a = SolveStackelberg(g);
    const StackelbergSolution b = BruteForceStackelberg(g);
    CHECK(a.leader_action == b.leader_action);
    CHECK(a.follower_action == b.follower_action);
    CHECK(a.leader_payoff == b.leader_payoff);
  }
}

TEST_CASE("solutions are invariant to positive affine payoff maps") {
  auto rng = MakeRng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixGame g = SampleRandomGame(4, 0.5, rng);
    MatrixGame h = g;
    h.u1 = 2.5 * g.u1.array() + 7.0;
    h.u2 = 0.3 * g.u2.array() - 1.0;
    const StackelbergSolution sg = SolveStackelberg(g);
    const StackelbergSolution sh = SolveStackelberg(h);
    CHECK(sg.leader_action == sh.leader_action);
    CHECK(sg.follower_action == sh.follower_action);
    CHECK(EnumeratePureNash(g).points == EnumeratePureNash(h).points);
  }
}

TEST_CASE("sampled payoff covariance tracks the requested covariance") {
  auto rng = MakeRng(45);
  for (double cov : {-1.0, -0.5, 0.0, 0.7, 1.0}) {
    double sum1 = 0, sum2 = 0, sum11 = 0, sum22 = 0, sum12 = 0;
    int n = 0;
    for (int trial = 0; trial < 400; ++trial) {
      const MatrixGame g = SampleRandomGame(5, cov, rng);
      for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
          sum1 += g.u1(i, j);
          sum2 += g.u2(i, j);
          sum11 += g.u1(i, j) * g.u1(i, j);
          sum22 += g.u2(i, j) * g.u2(i, j);
          sum12 += g.u1(i, j) * g.u2(i, j);
          ++n;
        }
      }
    }
    const double m1 = sum1 / n, m2 = sum2 / n;
    CHECK(std::abs(m1) < 0.05);
    CHECK(std::abs(m2) < 0.05);
    CHECK(std::abs(sum11 / n - m1 * m1 - 1.0) < 0.05);
    CHECK(std::abs(sum22 / n - m2 * m2 - 1.0) < 0.05);
    CHECK(std::abs(sum12 / n - m1 * m2 - cov) < 0.05);
  }
}

TEST_CASE("study rows are deterministic and ordered") {
  StudyConfig cfg;
  cfg.size_n = 6;
  cfg.covariances = {-0.5, 0.0, 0.5};
  cfg.trials = 300;
  cfg.seed = 9;
  const StudyResult a = SeVsNeStudy(cfg);
  const StudyResult b = SeVsNeStudy(cfg);
  CHECK(a.ToCsv() == b.ToCsv());
  REQUIRE(a.rows.size() == 3);
  CHECK(a.rows[0].covariance == -0.5);
  CHECK(a.rows[2].covariance == 0.5);
  // NE count grows with alignment of interests.
  CHECK(a.rows[0].ne_count < a.rows[2].ne_count);
  for (const StudyRow& row : a.rows) {
    CHECK(row.ne_exists_frac >= 0.0);
    CHECK(row.ne_exists_frac <= 1.0);
  }
}

TEST_CASE("fully aligned payoffs make SE and every NE coincide in value") {
  auto rng = MakeRng(46);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixGame g = SampleRandomGame(6, 1.0, rng);
    const StackelbergSolution se = SolveStackelberg(g);
    // Identical payoffs: the SE is the global maximum cell.
    CHECK(se.leader_payoff == doctest::Approx(g.u1.maxCoeff()));
    CHECK(se.follower_payoff == doctest::Approx(se.leader_payoff));
  }
}

TEST_CASE("json round trip") {
  const MatrixGame g = MaintainGame();
  const MatrixGame back = MatrixGameFromJson(MatrixGameToJson(g));
  CHECK(back.u1 == g.u1);
  CHECK(back.u2 == g.u2);
}

}  // namespace
}  // namespace stackeq
