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

#ifndef STACKEQ_MATRIX_GAME_H_
#define STACKEQ_MATRIX_GAME_H_

#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace stackeq {

// Finite two-player general-sum game in normal form. Rows are leader
// actions, columns follower actions. u1 holds the leader payoffs.
struct MatrixGame {
  Eigen::MatrixXd u1;
  Eigen::MatrixXd u2;

  int NumLeaderActions() const { return static_cast<int>(u1.rows()); }
  int NumFollowerActions() const { return static_cast<int>(u1.cols()); }

  // Throws std::invalid_argument on empty, mismatched or non-finite payoffs.
  void Validate() const;
};

struct StackelbergSolution {
  int leader_action = 0;
  int follower_action = 0;
  double leader_payoff = 0;
  double follower_payoff = 0;
};

struct PureNashSet {
  std::vector<std::pair<int, int>> points;  // row-major order
};

// Follower best response to a fixed leader action. Ties among the
// follower's maximizers are broken in the leader's favor (strong
// Stackelberg), remaining ties by lowest index.
int BestResponse(const MatrixGame& game, int leader_action);

// Strong Stackelberg equilibrium. Leader ties broken by lowest index.
StackelbergSolution SolveStackelberg(const MatrixGame& game);

// Pure-strategy Nash points under the strict best-response condition: every
// unilateral deviation strictly lowers the deviator's payoff.
PureNashSet EnumeratePureNash(const MatrixGame& game);

// Pure maximin action and security value for the leader.
std::pair<int, double> SolveMinimax(const MatrixGame& game);

// Pearson correlation of the two payoff matrices over all joint actions.
// Throws std::domain_error when either matrix is constant.
double CooperationLevel(const MatrixGame& game);

// Each cell's (u1, u2) pair drawn from a bivariate normal with zero means,
// unit variances and the given covariance (via 2x2 Cholesky).
MatrixGame SampleRandomGame(int size_n, double covariance,
                            std::mt19937_64& rng);

struct StudyConfig {
  int size_n = 10;
  std::vector<double> covariances;
  int trials = 2000;
  uint64_t seed = 1;
  void Validate() const;
};

struct StudyRow {
  double covariance = 0;
  double se_leader = 0;
  double se_follower = 0;
  double ne_leader = 0;   // mean over trials with >= 1 pure NE
  double ne_follower = 0;
  double ne_count = 0;
  double ne_exists_frac = 0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::string ToCsv() const;
};

// Monte-Carlo SE-vs-NE comparison over random games, one row per
// covariance. Trials without a pure NE contribute to the SE means and the
// existence fraction only.
StudyResult SeVsNeStudy(const StudyConfig& config);

// The two coordination games from the experiments. Escape: A-X and C-Z are
// the pure NEs, C-Z the SE at (30, 30). Maintain: B-Y and C-Z are the pure
// NEs, A-X the SE at (20, 15).
MatrixGame EscapeGame();
MatrixGame MaintainGame();

nlohmann::json MatrixGameToJson(const MatrixGame& game);
MatrixGame MatrixGameFromJson(const nlohmann::json& j);

}  // namespace stackeq

#endif  // STACKEQ_MATRIX_GAME_H_
