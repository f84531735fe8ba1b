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

#ifndef STACKEQ_BIAC_H_
#define STACKEQ_BIAC_H_

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "stackeq/common.h"
#include "stackeq/markov_game.h"
#include "stackeq/nn.h"

namespace stackeq {

struct GumbelConfig {
  double initial = 1.0;
  double final_value = 0.1;
  int anneal_steps = 0;  // 0: anneal over the whole run

  double At(int step, int total) const {
    const int span = anneal_steps > 0 ? anneal_steps : total;
    if (span <= 0 || step >= span) return final_value;
    return initial + (final_value - initial) * step / span;
  }
};

struct BiACConfig {
  double alpha1 = 0.01;  // leader critic learning rate
  double alpha2 = 0.01;  // follower critic
  double beta = 0.01;    // follower actor
  double gamma = -1;     // < 0: use the model's discount
  int batch_size = 32;
  int buffer_capacity = 50000;
  int target_sync_interval = 100;
  EpsSchedule eps;
  int warmup_steps = 1000;
  int episodes = 3000;
  uint64_t seed = 1;
  int hidden = 64;
  double momentum = 0.9;
  // Critic regression targets use scale * reward; keeps targets O(1) in
  // envs with large terminal payoffs. Values reported by the critics are
  // in the scaled unit.
  double reward_scale = 1.0;
  GumbelConfig gumbel;
  void Validate() const;
};

// Leader critic, follower critic (each with a target copy) and the
// follower's actor. Critics score (state ⊕ leader one-hot ⊕ follower
// action vector); the actor maps (state ⊕ leader one-hot) to follower
// logits.
struct BiACParams {
  Mlp q1, q2, actor;
  Mlp q1_target, q2_target;
  int num_actions1 = 0;
  int num_actions2 = 0;
  int feature_dim = 0;
};

BiACParams MakeBiacParams(int feature_dim, int num_actions1, int num_actions2,
                          int hidden, std::mt19937_64& rng);

// Function-backed interfaces so the action-selection rule can be tested
// against exact lookup tables as well as networks.
using LeaderCriticFn = std::function<double(const Eigen::VectorXd& state,
                                            int a1,
                                            const Eigen::VectorXd& a2_vec)>;
using FollowerActorFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& state, int a1)>;

// For each leader candidate, take the actor's greedy follower action and
// score it with the leader critic; return the best pair. Ties lexicographic.
std::pair<int, int> SelectNextActions(const LeaderCriticFn& q1,
                                      const FollowerActorFn& actor,
                                      const Eigen::VectorXd& state,
                                      int num_actions1, int num_actions2);
std::pair<int, int> SelectNextActions(const BiACParams& params,
                                      const Eigen::VectorXd& state);

double CriticValue(const Mlp& critic, const BiACParams& params,
                   const Eigen::VectorXd& state, int a1, int a2);
Eigen::VectorXd ActorLogits(const BiACParams& params,
                            const Eigen::VectorXd& state, int a1);

struct BiacTransition {
  Eigen::VectorXd s;
  Eigen::VectorXd s_next;
  int a1 = 0;
  int a2 = 0;
  double r1 = 0;
  double r2 = 0;
  bool done = false;
};

// Semi-gradient TD regression of both critics toward targets from the
// target networks at the jointly selected next actions.
void CriticUpdate(BiACParams& params, const std::vector<BiacTransition>& batch,
                  SgdOptimizer& opt1, SgdOptimizer& opt2, double gamma,
                  double reward_scale = 1.0);

// Policy-gradient ascent on log pi(a2 | s, a1) weighted by the current
// follower critic value of the taken joint action.
void ActorUpdate(BiACParams& params, const std::vector<BiacTransition>& batch,
                 SgdOptimizer& opt_actor);

struct BiacTrainResult {
  BiACParams params;
  RunRecord record;
};

BiacTrainResult TrainBiac(const MarkovGameModel& model,
                          const BiACConfig& config);

struct ExecutionStats {
  // Joint actions per step per episode, for the centralized/decentralized
  // equivalence check.
  std::vector<std::vector<std::array<int, 2>>> actions;
  double mean_ret1 = 0;
  double mean_ret2 = 0;
  double leader_first = 0;
  double follower_first = 0;
  double crash = 0;
};

// Both agents hold copies of (leader critic, follower actor) and each
// independently recomputes the greedy Stackelberg pair every step; the
// leader plays its a1, the follower its actor-greedy response.
ExecutionStats ExecuteDecentralized(const BiACParams& params,
                                    const MarkovGameModel& model, int episodes,
                                    uint64_t seed);
// Same rollout driven by a single centralized computation.
ExecutionStats ExecuteCentralized(const BiACParams& params,
                                  const MarkovGameModel& model, int episodes,
                                  uint64_t seed);

nlohmann::json BiacParamsToJson(const BiACParams& params);
BiACParams BiacParamsFromJson(const nlohmann::json& j);
// Params plus a manifest (env name, config hash, seed).
nlohmann::json BiacCheckpoint(const BiACParams& params, const std::string& env,
                              const BiACConfig& config);

}  // namespace stackeq

#endif  // STACKEQ_BIAC_H_
