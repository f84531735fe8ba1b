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

#include "stackeq/tabular.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace stackeq {

namespace {

// Greedy deterministic rollout; stochastic branches resolved by the
// highest-probability successor (all committed envs are deterministic past
// the start chance node).
std::vector<Transition> GreedyRollout(
    const MarkovGameModel& model, int start,
    const std::function<std::pair<int, int>(int)>& greedy_actions) {
  std::vector<Transition> episode;
  int s = start;
  const int horizon = model.horizon > 0 ? model.horizon : 1000;
  for (int t = 0; t < horizon && !model.terminal[s]; ++t) {
    const auto [a1, a2] = greedy_actions(s);
    const int idx = model.Index(s, a1, a2);
    const auto& dist = model.transitions[idx];
    int next = dist[0].first;
    double best_p = dist[0].second;
    for (const auto& [cand, p] : dist) {
      if (p > best_p) {
        next = cand;
        best_p = p;
      }
    }
    const auto& [r1, r2] = model.rewards[idx];
    episode.push_back({s, a1, a2, next, r1, r2, model.terminal[next]});
    s = next;
  }
  return episode;
}

double EpsAt(const TabularConfig& cfg, int episode) {
  EpsSchedule eps = cfg.eps;
  if (eps.decay_steps <= 0) eps.decay_steps = std::max(1, cfg.episodes / 2);
  return eps.At(episode);
}

}  // namespace

MatrixGame QTable::Stage(int s) const {
  MatrixGame g;
  g.u1.resize(num_actions1, num_actions2);
  g.u2.resize(num_actions1, num_actions2);
  for (int a1 = 0; a1 < num_actions1; ++a1) {
    for (int a2 = 0; a2 < num_actions2; ++a2) {
      g.u1(a1, a2) = Q1(s, a1, a2);
      g.u2(a1, a2) = Q2(s, a1, a2);
    }
  }
  return g;
}

void TabularConfig::Validate() const {
  if (alpha1 <= 0 || alpha1 > 1 || alpha2 <= 0 || alpha2 > 1) {
    throw std::invalid_argument("TabularConfig: alpha must be in (0, 1]");
  }
  if (episodes < 1) throw std::invalid_argument("TabularConfig: episodes < 1");
  if (eps.initial < 0 || eps.initial > 1 || eps.final_value < 0 ||
      eps.final_value > 1) {
    throw std::invalid_argument("TabularConfig: epsilon must be in [0, 1]");
  }
}

std::pair<int, int> StageActions(const QTable& q, int s) {
  const StackelbergSolution sol = SolveStackelberg(q.Stage(s));
  return {sol.leader_action, sol.follower_action};
}

void TdUpdate(QTable& q, const Transition& t, double alpha1, double alpha2,
              double gamma) {
  double boot1 = 0, boot2 = 0;
  if (!t.done) {
    const auto [a1n, a2n] = StageActions(q, t.s_next);
    boot1 = q.Q1(t.s_next, a1n, a2n);
    boot2 = q.Q2(t.s_next, a1n, a2n);
  }
  q.Q1(t.s, t.a1, t.a2) =
      (1 - alpha1) * q.Q1(t.s, t.a1, t.a2) + alpha1 * (t.r1 + gamma * boot1);
  q.Q2(t.s, t.a1, t.a2) =
      (1 - alpha2) * q.Q2(t.s, t.a1, t.a2) + alpha2 * (t.r2 + gamma * boot2);
}

GreedyEval EvaluateGreedy(
    const MarkovGameModel& model,
    const std::function<std::pair<int, int>(int)>& greedy_actions) {
  GreedyEval eval;
  const std::vector<int> starts = model.EvalStarts();
  std::vector<int> fingerprint;
  int merge_counts[4] = {0, 0, 0, 0};
  bool first = true;
  for (int start : starts) {
    const auto episode = GreedyRollout(model, start, greedy_actions);
    double r1 = 0, r2 = 0;
    for (const Transition& t : episode) {
      r1 += t.r1;
      r2 += t.r2;
      fingerprint.push_back(t.a1);
      fingerprint.push_back(t.a2);
      fingerprint.push_back(t.s_next);
    }
    eval.ret1 += r1 / starts.size();
    eval.ret2 += r2 / starts.size();
    if (first && !episode.empty()) {
      eval.a1_s0 = episode[0].a1;
      eval.a2_s0 = episode[0].a2;
      first = false;
    }
    ++merge_counts[static_cast<int>(ClassifyMergeOutcome(episode))];
  }
  eval.hash = HashInts(fingerprint);
  eval.leader_first = static_cast<double>(merge_counts[0]) / starts.size();
  eval.follower_first = static_cast<double>(merge_counts[1]) / starts.size();
  eval.crash = static_cast<double>(merge_counts[2]) / starts.size();
  if (model.name == "merge") {
    // Dominant greedy outcome as the label.
    const int best = static_cast<int>(
        std::max_element(merge_counts, merge_counts + 4) - merge_counts);
    eval.outcome = MergeOutcomeName(static_cast<MergeOutcome>(best));
  } else if (model.name == "grid") {
    eval.outcome = eval.ret1 >= 20 ? "both_at_20"
                   : eval.ret1 >= 10 ? "both_at_10"
                                     : "none";
  } else {
    std::ostringstream os;
    os << "a" << eval.a1_s0 << "-" << eval.a2_s0;
    eval.outcome = os.str();
  }
  return eval;
}

TabularTrainResult TrainBilevelQ(const MarkovGameModel& model,
                                 const TabularConfig& config) {
  model.Validate();
  config.Validate();
  const double gamma = config.gamma >= 0 ? config.gamma : model.gamma;
  auto rng = MakeRng(config.seed);
  std::uniform_int_distribution<int> u1(0, model.num_actions1 - 1);
  std::uniform_int_distribution<int> u2(0, model.num_actions2 - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  TabularTrainResult result;
  result.q = QTable(model.num_states, model.num_actions1, model.num_actions2);
  result.record.seed = config.seed;
  QTable& q = result.q;
  int global_step = 0;
  const int horizon = model.horizon > 0 ? model.horizon : 1000;

  for (int ep = 0; ep < config.episodes; ++ep) {
    const double eps = EpsAt(config, ep);
    int s = EnvReset(model);
    EpisodeLog log;
    log.episode = ep;
    for (int t = 0; t < horizon && !model.terminal[s]; ++t) {
      int a1, a2;
      if (global_step < config.warmup_steps) {
        a1 = u1(rng);
        a2 = u2(rng);
      } else {
        const auto [g1, g2] = StageActions(q, s);
        a1 = coin(rng) < eps ? u1(rng) : g1;
        a2 = coin(rng) < eps ? u2(rng) : g2;
      }
      const Transition tr = EnvStep(model, s, a1, a2, rng);
      TdUpdate(q, tr, config.alpha1, config.alpha2, gamma);
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
    const GreedyEval eval = EvaluateGreedy(
        model, [&](int state) { return StageActions(q, state); });
    log.greedy_a1 = eval.a1_s0;
    log.greedy_a2 = eval.a2_s0;
    log.policy_hash = eval.hash;
    log.outcome = eval.outcome;
    const int s0 = model.EvalStarts()[0];
    if (eval.a1_s0 >= 0) {
      log.tracked_q1 = q.Q1(s0, eval.a1_s0, eval.a2_s0);
      log.tracked_q2 = q.Q2(s0, eval.a1_s0, eval.a2_s0);
    }
    result.record.episodes.push_back(log);
  }
  result.record.converged = ConvergedOverTail(result.record.episodes);
  result.record.final_outcome = result.record.episodes.back().outcome;
  const GreedyEval final_eval = EvaluateGreedy(
      model, [&](int state) { return StageActions(q, state); });
  result.record.eval_leader_first = final_eval.leader_first;
  result.record.eval_follower_first = final_eval.follower_first;
  result.record.eval_crash = final_eval.crash;

  result.policy.a1.assign(model.num_states, -1);
  result.policy.a2.assign(model.num_states, -1);
  for (int s = 0; s < model.num_states; ++s) {
    if (model.terminal[s]) continue;
    const auto [a1, a2] = StageActions(q, s);
    result.policy.a1[s] = a1;
    result.policy.a2[s] = a2;
  }
  return result;
}

QTable BilevelBellmanOperator(const MarkovGameModel& model, const QTable& q) {
  std::vector<double> v1(model.num_states, 0.0), v2(model.num_states, 0.0);
  for (int s = 0; s < model.num_states; ++s) {
    if (model.terminal[s]) continue;
    const StackelbergSolution sol = SolveStackelberg(q.Stage(s));
    v1[s] = sol.leader_payoff;
    v2[s] = sol.follower_payoff;
  }
  QTable out(model.num_states, model.num_actions1, model.num_actions2);
  for (int s = 0; s < model.num_states; ++s) {
    if (model.terminal[s]) continue;
    for (int a1 = 0; a1 < model.num_actions1; ++a1) {
      for (int a2 = 0; a2 < model.num_actions2; ++a2) {
        const int idx = model.Index(s, a1, a2);
        double t1 = model.rewards[idx].first;
        double t2 = model.rewards[idx].second;
        for (const auto& [next, p] : model.transitions[idx]) {
          t1 += model.gamma * p * v1[next];
          t2 += model.gamma * p * v2[next];
        }
        out.Q1(s, a1, a2) = t1;
        out.Q2(s, a1, a2) = t2;
      }
    }
  }
  return out;
}

ValueIterationResult BilevelValueIteration(const MarkovGameModel& model,
                                           double tolerance) {
  model.Validate();
  ValueIterationResult result;
  result.q = QTable(model.num_states, model.num_actions1, model.num_actions2);
  constexpr int kMaxSweeps = 100000;
  for (result.sweeps = 0; result.sweeps < kMaxSweeps; ++result.sweeps) {
    const QTable next = BilevelBellmanOperator(model, result.q);
    double delta = 0;
    for (size_t i = 0; i < next.q1.size(); ++i) {
      delta = std::max(delta, std::abs(next.q1[i] - result.q.q1[i]));
      delta = std::max(delta, std::abs(next.q2[i] - result.q.q2[i]));
    }
    result.q = next;
    if (delta < tolerance) {
      result.converged = true;
      break;
    }
  }
  result.v1.assign(model.num_states, 0.0);
  result.v2.assign(model.num_states, 0.0);
  result.policy.a1.assign(model.num_states, -1);
  result.policy.a2.assign(model.num_states, -1);
  for (int s = 0; s < model.num_states; ++s) {
    if (model.terminal[s]) continue;
    const StackelbergSolution sol = SolveStackelberg(result.q.Stage(s));
    result.v1[s] = sol.leader_payoff;
    result.v2[s] = sol.follower_payoff;
    result.policy.a1[s] = sol.leader_action;
    result.policy.a2[s] = sol.follower_action;
  }
  return result;
}

IndependentTrainResult TrainIndependentQ(const MarkovGameModel& model,
                                         const TabularConfig& config) {
  model.Validate();
  config.Validate();
  const double gamma = config.gamma >= 0 ? config.gamma : model.gamma;
  auto rng = MakeRng(config.seed);
  std::uniform_int_distribution<int> u1(0, model.num_actions1 - 1);
  std::uniform_int_distribution<int> u2(0, model.num_actions2 - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  IndependentTrainResult result;
  result.record.seed = config.seed;
  result.q1.assign(static_cast<size_t>(model.num_states) * model.num_actions1,
                   0.0);
  result.q2.assign(static_cast<size_t>(model.num_states) * model.num_actions2,
                   0.0);
  auto greedy1 = [&](int s) {
    const double* row = &result.q1[static_cast<size_t>(s) * model.num_actions1];
    return static_cast<int>(std::max_element(row, row + model.num_actions1) -
                            row);
  };
  auto greedy2 = [&](int s) {
    const double* row = &result.q2[static_cast<size_t>(s) * model.num_actions2];
    return static_cast<int>(std::max_element(row, row + model.num_actions2) -
                            row);
  };
  auto greedy_joint = [&](int s) { return std::make_pair(greedy1(s), greedy2(s)); };

  int global_step = 0;
  const int horizon = model.horizon > 0 ? model.horizon : 1000;
  for (int ep = 0; ep < config.episodes; ++ep) {
    const double eps = EpsAt(config, ep);
    int s = EnvReset(model);
    EpisodeLog log;
    log.episode = ep;
    for (int t = 0; t < horizon && !model.terminal[s]; ++t) {
      int a1, a2;
      if (global_step < config.warmup_steps) {
        a1 = u1(rng);
        a2 = u2(rng);
      } else {
        a1 = coin(rng) < eps ? u1(rng) : greedy1(s);
        a2 = coin(rng) < eps ? u2(rng) : greedy2(s);
      }
      const Transition tr = EnvStep(model, s, a1, a2, rng);
      double boot1 = 0, boot2 = 0;
      if (!tr.done) {
        boot1 = result.q1[static_cast<size_t>(tr.s_next) * model.num_actions1 +
                          greedy1(tr.s_next)];
        boot2 = result.q2[static_cast<size_t>(tr.s_next) * model.num_actions2 +
                          greedy2(tr.s_next)];
      }
      double& c1 = result.q1[static_cast<size_t>(s) * model.num_actions1 + a1];
      double& c2 = result.q2[static_cast<size_t>(s) * model.num_actions2 + a2];
      c1 += config.alpha1 * (tr.r1 + gamma * boot1 - c1);
      c2 += config.alpha2 * (tr.r2 + gamma * boot2 - c2);
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
    log.tracked_q1 = result.q1[static_cast<size_t>(s0) * model.num_actions1 +
                               std::max(eval.a1_s0, 0)];
    log.tracked_q2 = result.q2[static_cast<size_t>(s0) * model.num_actions2 +
                               std::max(eval.a2_s0, 0)];
    result.record.episodes.push_back(log);
  }
  result.record.converged = ConvergedOverTail(result.record.episodes);
  result.record.final_outcome = result.record.episodes.back().outcome;
  const GreedyEval final_eval = EvaluateGreedy(model, greedy_joint);
  result.record.eval_leader_first = final_eval.leader_first;
  result.record.eval_follower_first = final_eval.follower_first;
  result.record.eval_crash = final_eval.crash;

  result.policy.a1.assign(model.num_states, -1);
  result.policy.a2.assign(model.num_states, -1);
  for (int s = 0; s < model.num_states; ++s) {
    if (model.terminal[s]) continue;
    result.policy.a1[s] = greedy1(s);
    result.policy.a2[s] = greedy2(s);
  }
  return result;
}

nlohmann::json QTableToJson(const QTable& q) {
  nlohmann::json j;
  j["num_states"] = q.num_states;
  j["num_actions1"] = q.num_actions1;
  j["num_actions2"] = q.num_actions2;
  for (int s = 0; s < q.num_states; ++s) {
    nlohmann::json s1 = nlohmann::json::array();
    nlohmann::json s2 = nlohmann::json::array();
    for (int a1 = 0; a1 < q.num_actions1; ++a1) {
      nlohmann::json r1 = nlohmann::json::array();
      nlohmann::json r2 = nlohmann::json::array();
      for (int a2 = 0; a2 < q.num_actions2; ++a2) {
        r1.push_back(q.Q1(s, a1, a2));
        r2.push_back(q.Q2(s, a1, a2));
      }
      s1.push_back(r1);
      s2.push_back(r2);
    }
    j["q1"].push_back(s1);
    j["q2"].push_back(s2);
  }
  return j;
}

QTable QTableFromJson(const nlohmann::json& j) {
  QTable q(j.at("num_states").get<int>(), j.at("num_actions1").get<int>(),
           j.at("num_actions2").get<int>());
  for (int s = 0; s < q.num_states; ++s) {
    for (int a1 = 0; a1 < q.num_actions1; ++a1) {
      for (int a2 = 0; a2 < q.num_actions2; ++a2) {
        q.Q1(s, a1, a2) = j.at("q1").at(s).at(a1).at(a2).get<double>();
        q.Q2(s, a1, a2) = j.at("q2").at(s).at(a1).at(a2).get<double>();
      }
    }
  }
  return q;
}

}  // namespace stackeq
