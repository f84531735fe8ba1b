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

#ifndef STACKEQ_TABULAR_H_
#define STACKEQ_TABULAR_H_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stackeq/common.h"
#include "stackeq/markov_game.h"
#include "stackeq/matrix_game.h"

namespace stackeq {

// Per-agent Q tables over (state, leader action, follower action).
struct QTable {
  int num_states = 0;
  int num_actions1 = 0;
  int num_actions2 = 0;
  std::vector<double> q1;
  std::vector<double> q2;

  QTable() = default;
  QTable(int states, int n1, int n2, double q0 = 0.0)
      : num_states(states),
        num_actions1(n1),
        num_actions2(n2),
        q1(static_cast<size_t>(states) * n1 * n2, q0),
        q2(static_cast<size_t>(states) * n1 * n2, q0) {}

  int Index(int s, int a1, int a2) const {
    return (s * num_actions1 + a1) * num_actions2 + a2;
  }
  double& Q1(int s, int a1, int a2) { return q1[Index(s, a1, a2)]; }
  double& Q2(int s, int a1, int a2) { return q2[Index(s, a1, a2)]; }
  double Q1(int s, int a1, int a2) const { return q1[Index(s, a1, a2)]; }
  double Q2(int s, int a1, int a2) const { return q2[Index(s, a1, a2)]; }

  // The stage game (Q1(s), Q2(s)).
  MatrixGame Stage(int s) const;
};

struct TabularConfig {
  double alpha1 = 0.1;   // leader learning rate (kept higher than follower)
  double alpha2 = 0.05;
  double gamma = -1;     // < 0: use the model's discount
  EpsSchedule eps;       // decay window defaults to half of training
  int warmup_steps = 1000;
  int episodes = 3000;
  uint64_t seed = 1;
  void Validate() const;
};

// Stage Stackelberg joint action of (Q1(s), Q2(s)) under the matrix-game
// tie rule (follower ties leader-favorable, then lowest index).
std::pair<int, int> StageActions(const QTable& q, int s);

// One bi-level TD step; touches exactly the visited cell in each table.
// Terminal next states bootstrap zero.
void TdUpdate(QTable& q, const Transition& t, double alpha1, double alpha2,
              double gamma);

struct TabularTrainResult {
  QTable q;
  JointPolicy policy;  // greedy via StageActions
  RunRecord record;
};

// Episodic epsilon-greedy bi-level Q-learning: the first warmup_steps
// transitions are uniform random; afterwards each agent independently
// uniform-randomizes its own action with probability eps, otherwise plays
// StageActions.
TabularTrainResult TrainBilevelQ(const MarkovGameModel& model,
                                 const TabularConfig& config);

struct ValueIterationResult {
  QTable q;
  std::vector<double> v1;
  std::vector<double> v2;
  JointPolicy policy;
  bool converged = false;
  int sweeps = 0;
};

// Synchronous sweeps of the bi-level Bellman backup: per-state values are
// the stage Stackelberg payoffs. Stops at sup-norm change < tolerance or
// 1e5 sweeps (converged=false then).
ValueIterationResult BilevelValueIteration(const MarkovGameModel& model,
                                           double tolerance = 1e-10);

// One synchronous application of the bi-level Bellman operator
// TQ_i = R_i + gamma * P [stage Stackelberg payoff of Q].
QTable BilevelBellmanOperator(const MarkovGameModel& model, const QTable& q);

struct IndependentTrainResult {
  // Per-agent Q over own actions only, indexed s * n_own + a.
  std::vector<double> q1;
  std::vector<double> q2;
  JointPolicy policy;
  RunRecord record;
};

// Standard independent Q-learning baseline; each agent treats the other as
// part of the environment.
IndependentTrainResult TrainIndependentQ(const MarkovGameModel& model,
                                         const TabularConfig& config);

// Deterministic greedy evaluation rollouts from the model's eval start
// states; fills greedy fields of an EpisodeLog and the outcome label.
struct GreedyEval {
  uint64_t hash = 0;
  int a1_s0 = -1;  // greedy joint action at the first eval start
  int a2_s0 = -1;
  double ret1 = 0;  // mean undiscounted return across eval starts
  double ret2 = 0;
  double leader_first = 0;  // merge outcome fractions
  double follower_first = 0;
  double crash = 0;
  std::string outcome;
};
GreedyEval EvaluateGreedy(
    const MarkovGameModel& model,
    const std::function<std::pair<int, int>(int)>& greedy_actions);

nlohmann::json QTableToJson(const QTable& q);
QTable QTableFromJson(const nlohmann::json& j);

}  // namespace stackeq

#endif  // STACKEQ_TABULAR_H_
