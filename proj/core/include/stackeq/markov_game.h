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

#ifndef STACKEQ_MARKOV_GAME_H_
#define STACKEQ_MARKOV_GAME_H_

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stackeq/matrix_game.h"

namespace stackeq {

struct Transition {
  int s = 0;
  int a1 = 0;
  int a2 = 0;
  int s_next = 0;
  double r1 = 0;
  double r2 = 0;
  bool done = false;
};

// Explicit finite two-player Markov game, usable both as a simulator and as
// a model for value iteration. Transitions and rewards are stored densely
// over (s, a1, a2); each transition entry is a sparse distribution over
// next states.
struct MarkovGameModel {
  int num_states = 0;
  int num_actions1 = 0;
  int num_actions2 = 0;
  int start_state = 0;
  double gamma = 0.95;
  int horizon = 0;  // 0 = unbounded; enforced by the episode loop
  std::vector<bool> terminal;
  std::vector<std::vector<std::pair<int, double>>> transitions;
  std::vector<std::pair<double, double>> rewards;
  std::vector<std::string> state_labels;
  // Optional numeric state encodings for approximators; one-hot when empty.
  std::vector<std::vector<double>> state_features;
  // States to start greedy evaluation rollouts from (start_state when empty;
  // the merge env lists the post-chance start configurations instead).
  std::vector<int> eval_start_states;
  std::string name;

  int Index(int s, int a1, int a2) const {
    return (s * num_actions1 + a1) * num_actions2 + a2;
  }
  std::vector<int> EvalStarts() const {
    return eval_start_states.empty() ? std::vector<int>{start_state}
                                     : eval_start_states;
  }
  std::vector<double> Features(int s) const;
  int FeatureDim() const;
  void Validate() const;  // throws on malformed distributions / terminals
};

int EnvReset(const MarkovGameModel& model);

// Samples the next state; throws on out-of-range actions or stepping a
// terminal state. `done` is set from next-state terminality only; horizon
// truncation is the episode loop's concern.
Transition EnvStep(const MarkovGameModel& model, int s, int a1, int a2,
                   std::mt19937_64& rng);

// One-step wrapper: a single non-terminal start state, every joint action
// pays the matrix entries and terminates.
MarkovGameModel MakeMatrixEnv(const MatrixGame& game, double gamma = 0.95);

// 1x5 corridor with reward 10 at cell 0 and 20 at cell 4; agents start at
// cells 1 and 3, actions {left, stay, right}, simultaneous moves. Both
// agents on the same reward square ends the episode with that common
// reward. Horizon 20, gamma 0.95.
MarkovGameModel MakeGridEnv();
inline constexpr int kGridLeft = 0;
inline constexpr int kGridStay = 1;
inline constexpr int kGridRight = 2;
int GridStateIndex(int pos_a, int pos_b);
// Leader-policy aggregation by own cell, for the oracle.
std::vector<int> GridLeaderGroups(const MarkovGameModel& grid);

// Two-state game whose bi-level Bellman equation admits a fixed point that
// does not solve the bi-level problem (see VerifyCounterexample).
MarkovGameModel MakeCounterexampleEnv(double gamma = 0.9);
// The committed fixed-point Q tables for that game under joint policy
// (A, B), self-consistent for the given gamma.
std::pair<MatrixGame, std::pair<double, double>> CounterexampleQStar(
    double gamma = 0.9);

struct MergeConfig {
  int lane_length = 12;   // cells 0..lane_length-1; pos >= lane_length passed
  int merge_point = 6;    // auxiliary lane ends here
  int max_speed = 2;
  int horizon = 50;
  double gamma = 0.95;
  void Validate() const;  // throws when merge_point >= lane_length
};

inline constexpr int kMergeLaneLeft = 0;
inline constexpr int kMergeLaneRight = 1;
inline constexpr int kMergeFaster = 2;
inline constexpr int kMergeSlower = 3;
inline constexpr int kMergeIdle = 4;

// Simplified two-car merge: leader on the main lane (0), follower on the
// auxiliary lane (1) which ends at merge_point. Deterministic kinematics;
// the only chance node is the start state, which randomizes both start
// speeds over {1, 2}. First car past the road gets +50, second +10, a
// same-lane same-cell collision pays -10 each and terminates.
MarkovGameModel MakeMergeEnv(const MergeConfig& config = MergeConfig{});

enum class MergeOutcome { kLeaderFirst, kFollowerFirst, kCrash, kNone };
// Classification from terminal rewards of a rollout (+50 holder passed
// first; -10 marks a crash).
MergeOutcome ClassifyMergeOutcome(const std::vector<Transition>& episode);
std::string MergeOutcomeName(MergeOutcome o);

// Deterministic action choices per state. -1 marks terminal states.
struct JointPolicy {
  std::vector<int> a1;
  std::vector<int> a2;
};

// Exact discounted policy evaluation by iterative sweeps (tolerance 1e-12,
// well below the 1e-10 contract).
std::pair<std::vector<double>, std::vector<double>> EvaluateJointPolicy(
    const MarkovGameModel& model, const JointPolicy& policy);

struct BirlSolution {
  JointPolicy policy;
  double leader_value = 0;
  double follower_value = 0;
};

// Brute-force bi-level solution over deterministic policies: enumerate
// leader policies; for each, compute the follower's exact best response by
// dynamic programming, breaking follower ties in the leader's favor and
// then by lowest index; return the leader-optimal pair (leader ties by
// enumeration order, i.e. lexicographic).
//
// leader_groups, when given, restricts the leader to policies constant on
// each group (the grid env uses own-cell groups to keep enumeration small).
// Throws std::length_error when |A1|^num_groups exceeds 10^6.
BirlSolution BirlOracle(const MarkovGameModel& model,
                        const std::vector<int>* leader_groups = nullptr);

nlohmann::json ModelToJson(const MarkovGameModel& model);
MarkovGameModel ModelFromJson(const nlohmann::json& j);
std::string TransitionToJsonLine(const Transition& t);

}  // namespace stackeq

#endif  // STACKEQ_MARKOV_GAME_H_
