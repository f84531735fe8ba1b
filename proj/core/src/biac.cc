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

#include "stackeq/biac.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "stackeq/tabular.h"

namespace stackeq {

namespace {

Eigen::VectorXd CriticInput(const Eigen::VectorXd& state, int a1, int n1,
                            const Eigen::VectorXd& a2_vec) {
  Eigen::VectorXd x(state.size() + n1 + a2_vec.size());
  x.head(state.size()) = state;
  x.segment(state.size(), n1).setZero();
  x[state.size() + a1] = 1.0;
  x.tail(a2_vec.size()) = a2_vec;
  return x;
}

Eigen::VectorXd ActorInput(const Eigen::VectorXd& state, int a1, int n1) {
  Eigen::VectorXd x(state.size() + n1);
  x.head(state.size()) = state;
  x.tail(n1).setZero();
  x[state.size() + a1] = 1.0;
  return x;
}

Eigen::VectorXd OneHot(int i, int n) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[i] = 1.0;
  return v;
}

Eigen::VectorXd ToVec(const std::vector<double>& xs) {
  return Eigen::Map<const Eigen::VectorXd>(xs.data(),
                                           static_cast<int>(xs.size()));
}

double CriticValueVec(const Mlp& critic, const Eigen::VectorXd& state, int a1,
                      int n1, const Eigen::VectorXd& a2_vec) {
  return Forward(critic, CriticInput(state, a1, n1, a2_vec))(0, 0);
}

int ArgmaxLowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

void BiACConfig::Validate() const {
  if (alpha1 <= 0 || alpha2 <= 0 || beta <= 0) {
    throw std::invalid_argument("BiACConfig: learning rates must be positive");
  }
  if (batch_size < 1 || buffer_capacity < batch_size) {
    throw std::invalid_argument("BiACConfig: bad batch/buffer sizes");
  }
  if (target_sync_interval < 1) {
    throw std::invalid_argument("BiACConfig: target_sync_interval < 1");
  }
  if (episodes < 1) throw std::invalid_argument("BiACConfig: episodes < 1");
  if (hidden < 1) throw std::invalid_argument("BiACConfig: hidden < 1");
  if (reward_scale <= 0) {
    throw std::invalid_argument("BiACConfig: reward_scale must be positive");
  }
  if (gumbel.initial <= 0 || gumbel.final_value <= 0) {
    throw std::invalid_argument("BiACConfig: temperatures must be positive");
  }
}

BiACParams MakeBiacParams(int feature_dim, int num_actions1, int num_actions2,
                          int hidden, std::mt19937_64& rng) {
  if (feature_dim < 1 || num_actions1 < 1 || num_actions2 < 1) {
    throw std::invalid_argument("MakeBiacParams: bad dimensions");
  }
  BiACParams p;
  p.feature_dim = feature_dim;
  p.num_actions1 = num_actions1;
  p.num_actions2 = num_actions2;
  const int critic_in = feature_dim + num_actions1 + num_actions2;
  p.q1 = MakeMlp({critic_in, hidden, hidden, 1}, rng);
  p.q2 = MakeMlp({critic_in, hidden, hidden, 1}, rng);
  p.actor = MakeMlp({feature_dim + num_actions1, hidden, num_actions2}, rng);
  p.q1_target = p.q1;
  p.q2_target = p.q2;
  return p;
}

std::pair<int, int> SelectNextActions(const LeaderCriticFn& q1,
                                      const FollowerActorFn& actor,
                                      const Eigen::VectorXd& state,
                                      int num_actions1, int num_actions2) {
  int best_a1 = 0, best_a2 = 0;
  double best_v = 0;
  for (int a1 = 0; a1 < num_actions1; ++a1) {
    const Eigen::VectorXd logits = actor(state, a1);
    if (logits.size() != num_actions2) {
      throw std::invalid_argument("SelectNextActions: actor output size");
    }
    const int a2 = ArgmaxLowest(logits);
    const double v = q1(state, a1, OneHot(a2, num_actions2));
    if (a1 == 0 || v > best_v) {
      best_v = v;
      best_a1 = a1;
      best_a2 = a2;
    }
  }
  return {best_a1, best_a2};
}

std::pair<int, int> SelectNextActions(const BiACParams& params,
                                      const Eigen::VectorXd& state) {
  return SelectNextActions(
      [&](const Eigen::VectorXd& s, int a1, const Eigen::VectorXd& a2v) {
        return CriticValueVec(params.q1, s, a1, params.num_actions1, a2v);
      },
      [&](const Eigen::VectorXd& s, int a1) -> Eigen::VectorXd {
        // Materialize before the forward pass temporary dies.
        return Forward(params.actor, ActorInput(s, a1, params.num_actions1))
            .col(0);
      },
      state, params.num_actions1, params.num_actions2);
}

double CriticValue(const Mlp& critic, const BiACParams& params,
                   const Eigen::VectorXd& state, int a1, int a2) {
  return CriticValueVec(critic, state, a1, params.num_actions1,
                        OneHot(a2, params.num_actions2));
}

Eigen::VectorXd ActorLogits(const BiACParams& params,
                            const Eigen::VectorXd& state, int a1) {
  return Forward(params.actor, ActorInput(state, a1, params.num_actions1))
      .col(0);
}

void CriticUpdate(BiACParams& params, const std::vector<BiacTransition>& batch,
                  SgdOptimizer& opt1, SgdOptimizer& opt2, double gamma,
                  double reward_scale) {
  const int B = static_cast<int>(batch.size());
  if (B == 0) throw std::invalid_argument("CriticUpdate: empty batch");
  const int in_dim = params.q1.InputDim();
  Eigen::MatrixXd x(in_dim, B);
  Eigen::VectorXd y1(B), y2(B);
  for (int i = 0; i < B; ++i) {
    const BiacTransition& t = batch[i];
    x.col(i) = CriticInput(t.s, t.a1, params.num_actions1,
                           OneHot(t.a2, params.num_actions2));
    double boot1 = 0, boot2 = 0;
    if (!t.done) {
      const auto [a1n, a2n] = SelectNextActions(params, t.s_next);
      boot1 = CriticValue(params.q1_target, params, t.s_next, a1n, a2n);
      boot2 = CriticValue(params.q2_target, params, t.s_next, a1n, a2n);
    }
    y1[i] = reward_scale * t.r1 + gamma * boot1;
    y2[i] = reward_scale * t.r2 + gamma * boot2;
  }
  // Mean squared TD error, semi-gradient (targets held fixed).
  ForwardCache cache1, cache2;
  const Eigen::MatrixXd pred1 = Forward(params.q1, x, &cache1);
  const Eigen::MatrixXd pred2 = Forward(params.q2, x, &cache2);
  const Eigen::MatrixXd dy1 = (pred1.row(0).transpose() - y1).transpose() / B;
  const Eigen::MatrixXd dy2 = (pred2.row(0).transpose() - y2).transpose() / B;
  opt1.Step(params.q1, Backward(params.q1, cache1, dy1));
  opt2.Step(params.q2, Backward(params.q2, cache2, dy2));
}

void ActorUpdate(BiACParams& params, const std::vector<BiacTransition>& batch,
                 SgdOptimizer& opt_actor) {
  const int B = static_cast<int>(batch.size());
  if (B == 0) throw std::invalid_argument("ActorUpdate: empty batch");
  const int in_dim = params.actor.InputDim();
  Eigen::MatrixXd x(in_dim, B);
  for (int i = 0; i < B; ++i) {
    x.col(i) = ActorInput(batch[i].s, batch[i].a1, params.num_actions1);
  }
  ForwardCache cache;
  const Eigen::MatrixXd logits = Forward(params.actor, x, &cache);
  Eigen::MatrixXd dlogits(logits.rows(), B);
  for (int i = 0; i < B; ++i) {
    const BiacTransition& t = batch[i];
    const double w = CriticValue(params.q2, params, t.s, t.a1, t.a2);
    // d(-w * log pi(a2)) / dlogits = w * (softmax - onehot(a2)); the
    // optimizer descends, so this ascends the weighted log-likelihood.
    Eigen::VectorXd g = Softmax(logits.col(i));
    g[t.a2] -= 1.0;
    dlogits.col(i) = w * g / B;
  }
  opt_actor.Step(params.actor, Backward(params.actor, cache, dlogits));
}

BiacTrainResult TrainBiac(const MarkovGameModel& model,
                          const BiACConfig& config) {
  model.Validate();
  config.Validate();
  const double gamma = config.gamma >= 0 ? config.gamma : model.gamma;
  auto rng = MakeRng(config.seed);
  std::uniform_int_distribution<int> u1(0, model.num_actions1 - 1);
  std::uniform_int_distribution<int> u2(0, model.num_actions2 - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  // Cache per-state feature vectors once.
  std::vector<Eigen::VectorXd> feats(model.num_states);
  for (int s = 0; s < model.num_states; ++s) feats[s] = ToVec(model.Features(s));

  BiacTrainResult result;
  result.params = MakeBiacParams(model.FeatureDim(), model.num_actions1,
                                 model.num_actions2, config.hidden, rng);
  BiACParams& params = result.params;
  result.record.seed = config.seed;

  SgdOptimizer opt1(config.alpha1, config.momentum);
  SgdOptimizer opt2(config.alpha2, config.momentum);
  SgdOptimizer opt_actor(config.beta, config.momentum);
  ReplayBuffer<BiacTransition> buffer(config.buffer_capacity);

  EpsSchedule eps_schedule = config.eps;
  if (eps_schedule.decay_steps <= 0) {
    eps_schedule.decay_steps = std::max(1, config.episodes / 2);
  }

  auto greedy_joint = [&](int state) {
    return SelectNextActions(params, feats[state]);
  };

  int global_step = 0;
  const int horizon = model.horizon > 0 ? model.horizon : 1000;
  for (int ep = 0; ep < config.episodes; ++ep) {
    const double eps = eps_schedule.At(ep);
    const double temp = config.gumbel.At(ep, config.episodes);
    int s = EnvReset(model);
    EpisodeLog log;
    log.episode = ep;
    for (int t = 0; t < horizon && !model.terminal[s]; ++t) {
      int a1, a2;
      if (global_step < config.warmup_steps) {
        a1 = u1(rng);
        a2 = u2(rng);
      } else {
        const auto [g1, g2] = SelectNextActions(params, feats[s]);
        (void)g2;
        a1 = coin(rng) < eps ? u1(rng) : g1;
        // Both agents behave eps-greedily; the follower's on-policy action
        // is a sample from its actor.
        a2 = GumbelSoftmaxSample(ActorLogits(params, feats[s], a1), temp, rng)
                 .hard_index;
        if (coin(rng) < eps) a2 = u2(rng);
      }
      const Transition tr = EnvStep(model, s, a1, a2, rng);
      buffer.Push({feats[s], feats[tr.s_next], a1, a2, tr.r1, tr.r2, tr.done});
      if (global_step >= config.warmup_steps) {
        const auto batch = buffer.Sample(config.batch_size, rng);
        CriticUpdate(params, batch, opt1, opt2, gamma, config.reward_scale);
        ActorUpdate(params, batch, opt_actor);
        if (global_step % config.target_sync_interval == 0) {
          SyncTarget(params.q1, params.q1_target);
          SyncTarget(params.q2, params.q2_target);
        }
      }
      if (t == 0) {
        log.taken_a1 = a1;
        log.taken_a2 = a2;
      }
      log.ret1 += tr.r1;
      log.ret2 += tr.r2;
      s = tr.s_next;
      ++global_step;
      if (tr.done) break;
    }
    const GreedyEval eval = EvaluateGreedy(model, greedy_joint);
    log.greedy_a1 = eval.a1_s0;
    log.greedy_a2 = eval.a2_s0;
    log.policy_hash = eval.hash;
    log.outcome = eval.outcome;
    const int s0 = model.EvalStarts()[0];
    if (eval.a1_s0 >= 0) {
      log.tracked_q1 =
          CriticValue(params.q1, params, feats[s0], eval.a1_s0, eval.a2_s0);
      log.tracked_q2 =
          CriticValue(params.q2, params, feats[s0], eval.a1_s0, eval.a2_s0);
    }
    result.record.episodes.push_back(log);
  }
  result.record.converged = ConvergedOverTail(result.record.episodes);
  result.record.final_outcome = result.record.episodes.back().outcome;
  const GreedyEval final_eval = EvaluateGreedy(model, greedy_joint);
  result.record.eval_leader_first = final_eval.leader_first;
  result.record.eval_follower_first = final_eval.follower_first;
  result.record.eval_crash = final_eval.crash;
  return result;
}

ExecutionStats ExecuteCentralized(const BiACParams& params,
                                  const MarkovGameModel& model, int episodes,
                                  uint64_t seed) {
  model.Validate();
  std::vector<Eigen::VectorXd> feats(model.num_states);
  for (int s = 0; s < model.num_states; ++s) feats[s] = ToVec(model.Features(s));
  ExecutionStats stats;
  int merge_counts[4] = {0, 0, 0, 0};
  const int horizon = model.horizon > 0 ? model.horizon : 1000;
  for (int ep = 0; ep < episodes; ++ep) {
    auto rng = MakeRng(seed, ep);
    int s = EnvReset(model);
    std::vector<std::array<int, 2>> actions;
    std::vector<Transition> episode;
    for (int t = 0; t < horizon && !model.terminal[s]; ++t) {
      const auto [a1, a2] = SelectNextActions(params, feats[s]);
      const Transition tr = EnvStep(model, s, a1, a2, rng);
      actions.push_back({a1, a2});
      episode.push_back(tr);
      stats.mean_ret1 += tr.r1 / episodes;
      stats.mean_ret2 += tr.r2 / episodes;
      s = tr.s_next;
      if (tr.done) break;
    }
    ++merge_counts[static_cast<int>(ClassifyMergeOutcome(episode))];
    stats.actions.push_back(std::move(actions));
  }
  stats.leader_first = static_cast<double>(merge_counts[0]) / episodes;
  stats.follower_first = static_cast<double>(merge_counts[1]) / episodes;
  stats.crash = static_cast<double>(merge_counts[2]) / episodes;
  return stats;
}

ExecutionStats ExecuteDecentralized(const BiACParams& params,
                                    const MarkovGameModel& model, int episodes,
                                    uint64_t seed) {
  model.Validate();
  // Each side holds its own copy of the trained parameters and recomputes
  // the greedy pair locally every step; no messages are exchanged.
  const BiACParams leader_copy = params;
  const BiACParams follower_copy = params;
  std::vector<Eigen::VectorXd> feats(model.num_states);
  for (int s = 0; s < model.num_states; ++s) feats[s] = ToVec(model.Features(s));
  ExecutionStats stats;
  int merge_counts[4] = {0, 0, 0, 0};
  const int horizon = model.horizon > 0 ? model.horizon : 1000;
  for (int ep = 0; ep < episodes; ++ep) {
    auto rng = MakeRng(seed, ep);
    int s = EnvReset(model);
    std::vector<std::array<int, 2>> actions;
    std::vector<Transition> episode;
    for (int t = 0; t < horizon && !model.terminal[s]; ++t) {
      const int a1 = SelectNextActions(leader_copy, feats[s]).first;
      const int a2 = SelectNextActions(follower_copy, feats[s]).second;
      const Transition tr = EnvStep(model, s, a1, a2, rng);
      actions.push_back({a1, a2});
      episode.push_back(tr);
      stats.mean_ret1 += tr.r1 / episodes;
      stats.mean_ret2 += tr.r2 / episodes;
      s = tr.s_next;
      if (tr.done) break;
    }
    ++merge_counts[static_cast<int>(ClassifyMergeOutcome(episode))];
    stats.actions.push_back(std::move(actions));
  }
  stats.leader_first = static_cast<double>(merge_counts[0]) / episodes;
  stats.follower_first = static_cast<double>(merge_counts[1]) / episodes;
  stats.crash = static_cast<double>(merge_counts[2]) / episodes;
  return stats;
}

nlohmann::json BiacParamsToJson(const BiACParams& params) {
  nlohmann::json j;
  j["num_actions1"] = params.num_actions1;
  j["num_actions2"] = params.num_actions2;
  j["feature_dim"] = params.feature_dim;
  j["q1"] = MlpToJson(params.q1);
  j["q2"] = MlpToJson(params.q2);
  j["actor"] = MlpToJson(params.actor);
  j["q1_target"] = MlpToJson(params.q1_target);
  j["q2_target"] = MlpToJson(params.q2_target);
  return j;
}

BiACParams BiacParamsFromJson(const nlohmann::json& j) {
  BiACParams p;
  p.num_actions1 = j.at("num_actions1").get<int>();
  p.num_actions2 = j.at("num_actions2").get<int>();
  p.feature_dim = j.at("feature_dim").get<int>();
  p.q1 = MlpFromJson(j.at("q1"));
  p.q2 = MlpFromJson(j.at("q2"));
  p.actor = MlpFromJson(j.at("actor"));
  p.q1_target = MlpFromJson(j.at("q1_target"));
  p.q2_target = MlpFromJson(j.at("q2_target"));
  return p;
}

nlohmann::json BiacCheckpoint(const BiACParams& params, const std::string& env,
                              const BiACConfig& config) {
  nlohmann::json j;
  j["params"] = BiacParamsToJson(params);
  std::ostringstream cfg;
  cfg.precision(17);
  cfg << config.alpha1 << ',' << config.alpha2 << ',' << config.beta << ','
      << config.gamma << ',' << config.batch_size << ','
      << config.buffer_capacity << ',' << config.target_sync_interval << ','
      << config.eps.initial << ',' << config.eps.final_value << ','
      << config.eps.decay_steps << ',' << config.warmup_steps << ','
      << config.episodes << ',' << config.hidden << ',' << config.momentum
      << ',' << config.gumbel.initial << ',' << config.gumbel.final_value
      << ',' << config.gumbel.anneal_steps;
  j["manifest"] = {{"env", env},
                   {"seed", config.seed},
                   {"config", cfg.str()},
                   {"config_hash", std::hash<std::string>{}(cfg.str())}};
  return j;
}

}  // namespace stackeq
