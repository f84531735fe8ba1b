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

#include "stackeq/markov_game.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

namespace stackeq {

namespace {
constexpr double kDistTolerance = 1e-9;
constexpr double kEvalTolerance = 1e-12;
}  // namespace

std::vector<double> MarkovGameModel::Features(int s) const {
  if (!state_features.empty()) return state_features[s];
  std::vector<double> f(num_states, 0.0);
  f[s] = 1.0;
  return f;
}

int MarkovGameModel::FeatureDim() const {
  return state_features.empty() ? num_states
                                : static_cast<int>(state_features[0].size());
}

void MarkovGameModel::Validate() const {
  if (num_states <= 0 || num_actions1 <= 0 || num_actions2 <= 0) {
    throw std::invalid_argument("MarkovGameModel: empty state/action space");
  }
  if (gamma < 0 || gamma >= 1.0) {
    throw std::invalid_argument("MarkovGameModel: gamma must be in [0, 1)");
  }
  const size_t cells =
      static_cast<size_t>(num_states) * num_actions1 * num_actions2;
  if (transitions.size() != cells || rewards.size() != cells ||
      terminal.size() != static_cast<size_t>(num_states)) {
    throw std::invalid_argument("MarkovGameModel: table shape mismatch");
  }
  for (int s = 0; s < num_states; ++s) {
    for (int a1 = 0; a1 < num_actions1; ++a1) {
      for (int a2 = 0; a2 < num_actions2; ++a2) {
        const auto& dist = transitions[Index(s, a1, a2)];
        if (terminal[s]) {
          if (!dist.empty()) {
            throw std::invalid_argument(
                "MarkovGameModel: terminal state has outgoing transitions");
          }
          continue;
        }
        double total = 0;
        for (const auto& [next, p] : dist) {
          if (next < 0 || next >= num_states || p < 0) {
            throw std::invalid_argument("MarkovGameModel: bad transition");
          }
          total += p;
        }
        if (std::abs(total - 1.0) > kDistTolerance) {
          throw std::invalid_argument(
              "MarkovGameModel: transition distribution does not sum to 1");
        }
        const auto& [r1, r2] = rewards[Index(s, a1, a2)];
        if (!std::isfinite(r1) || !std::isfinite(r2)) {
          throw std::invalid_argument("MarkovGameModel: non-finite reward");
        }
      }
    }
  }
}

int EnvReset(const MarkovGameModel& model) { return model.start_state; }

Transition EnvStep(const MarkovGameModel& model, int s, int a1, int a2,
                   std::mt19937_64& rng) {
  if (s < 0 || s >= model.num_states) {
    throw std::out_of_range("EnvStep: state out of range");
  }
  if (model.terminal[s]) {
    throw std::logic_error("EnvStep: stepping a terminal state");
  }
  if (a1 < 0 || a1 >= model.num_actions1 || a2 < 0 ||
      a2 >= model.num_actions2) {
    throw std::out_of_range("EnvStep: action out of range");
  }
  const auto& dist = model.transitions[model.Index(s, a1, a2)];
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  int next = dist.back().first;
  for (const auto& [cand, p] : dist) {
    if (x < p) {
      next = cand;
      break;
    }
    x -= p;
  }
  const auto& [r1, r2] = model.rewards[model.Index(s, a1, a2)];
  return Transition{s, a1, a2, next, r1, r2, model.terminal[next]};
}

MarkovGameModel MakeMatrixEnv(const MatrixGame& game, double gamma) {
  game.Validate();
  MarkovGameModel m;
  m.name = "matrix";
  m.num_states = 2;  // start, terminal
  m.num_actions1 = game.NumLeaderActions();
  m.num_actions2 = game.NumFollowerActions();
  m.start_state = 0;
  m.gamma = gamma;
  m.horizon = 1;
  m.terminal = {false, true};
  m.state_labels = {"s0", "terminal"};
  const size_t cells = 2ul * m.num_actions1 * m.num_actions2;
  m.transitions.resize(cells);
  m.rewards.resize(cells, {0, 0});
  for (int a1 = 0; a1 < m.num_actions1; ++a1) {
    for (int a2 = 0; a2 < m.num_actions2; ++a2) {
      m.transitions[m.Index(0, a1, a2)] = {{1, 1.0}};
      m.rewards[m.Index(0, a1, a2)] = {game.u1(a1, a2), game.u2(a1, a2)};
    }
  }
  m.Validate();
  return m;
}

int GridStateIndex(int pos_a, int pos_b) { return pos_a * 5 + pos_b; }

MarkovGameModel MakeGridEnv() {
  constexpr int kCells = 5;
  constexpr double kReward[kCells] = {10, 0, 0, 0, 20};
  MarkovGameModel m;
  m.name = "grid";
  m.num_states = kCells * kCells;
  m.num_actions1 = 3;
  m.num_actions2 = 3;
  m.start_state = GridStateIndex(1, 3);
  m.gamma = 0.95;
  m.horizon = 20;
  m.terminal.assign(m.num_states, false);
  m.terminal[GridStateIndex(0, 0)] = true;
  m.terminal[GridStateIndex(4, 4)] = true;
  const size_t cells = static_cast<size_t>(m.num_states) * 9;
  m.transitions.resize(cells);
  m.rewards.resize(cells, {0, 0});
  m.state_labels.resize(m.num_states);
  auto move = [](int pos, int action) {
    const int delta = action - 1;  // left, stay, right
    return std::clamp(pos + delta, 0, kCells - 1);
  };
  for (int pa = 0; pa < kCells; ++pa) {
    for (int pb = 0; pb < kCells; ++pb) {
      const int s = GridStateIndex(pa, pb);
      m.state_labels[s] = "A" + std::to_string(pa) + "B" + std::to_string(pb);
      if (m.terminal[s]) continue;
      for (int a1 = 0; a1 < 3; ++a1) {
        for (int a2 = 0; a2 < 3; ++a2) {
          const int na = move(pa, a1);
          const int nb = move(pb, a2);
          const int next = GridStateIndex(na, nb);
          m.transitions[m.Index(s, a1, a2)] = {{next, 1.0}};
          if (na == nb && kReward[na] > 0) {
            m.rewards[m.Index(s, a1, a2)] = {kReward[na], kReward[na]};
          }
        }
      }
    }
  }
  m.Validate();
  return m;
}

std::vector<int> GridLeaderGroups(const MarkovGameModel& grid) {
  std::vector<int> groups(grid.num_states, 0);
  for (int pa = 0; pa < 5; ++pa) {
    for (int pb = 0; pb < 5; ++pb) groups[GridStateIndex(pa, pb)] = pa;
  }
  return groups;
}

MarkovGameModel MakeCounterexampleEnv(double gamma) {
  MarkovGameModel m;
  m.name = "counterexample";
  m.num_states = 2;
  m.num_actions1 = 2;
  m.num_actions2 = 2;
  m.start_state = 0;
  m.gamma = gamma;
  m.horizon = 200;
  m.terminal = {false, true};
  m.state_labels = {"s1", "s2"};
  m.transitions.resize(8);
  m.rewards.resize(8, {0, 0});
  constexpr int A = 0, B = 1;
  m.transitions[m.Index(0, A, A)] = {{0, 1.0}};
  m.transitions[m.Index(0, A, B)] = {{1, 1.0}};
  m.transitions[m.Index(0, B, A)] = {{1, 1.0}};
  m.transitions[m.Index(0, B, B)] = {{0, 1.0}};
  m.rewards[m.Index(0, A, A)] = {0, 0};
  m.rewards[m.Index(0, A, B)] = {0, 10};
  m.rewards[m.Index(0, B, A)] = {10, 0};
  m.rewards[m.Index(0, B, B)] = {-1, -1};
  m.Validate();
  return m;
}

std::pair<MatrixGame, std::pair<double, double>> CounterexampleQStar(
    double gamma) {
  // Fixed point of the bi-level Bellman equation under joint policy (A, B):
  // V = (0, 10), the cyclic cells bootstrap through V.
  MatrixGame q;
  q.u1.resize(2, 2);
  q.u2.resize(2, 2);
  q.u1 << 0, 0,
          10, -1;
  q.u2 << gamma * 10, 10,
          0, -1 + gamma * 10;
  return {q, {0.0, 10.0}};
}

void MergeConfig::Validate() const {
  if (lane_length < 2 || merge_point < 1 || merge_point >= lane_length) {
    throw std::invalid_argument("MergeConfig: need 0 < merge_point < lane_length");
  }
  if (max_speed < 1 || horizon < 1) {
    throw std::invalid_argument("MergeConfig: bad max_speed/horizon");
  }
}

namespace {

struct MergeCar {
  int lane = 0;
  int pos = 0;
  int speed = 0;
  bool passed = false;

  bool operator<(const MergeCar& o) const {
    return std::tie(lane, pos, speed, passed) <
           std::tie(o.lane, o.pos, o.speed, o.passed);
  }
};

struct MergeState {
  MergeCar car[2];
  int first = 0;  // 0 none, 1 leader passed first, 2 follower

  bool operator<(const MergeState& o) const {
    return std::tie(car[0], car[1], first) <
           std::tie(o.car[0], o.car[1], o.first);
  }
};

// Raw post-move car state; positions are not clamped so that simultaneous
// passes can still be ordered and collision-checked at true cells.
MergeCar StepCar(const MergeCar& in, int action, const MergeConfig& cfg) {
  MergeCar c = in;
  if (c.passed) return c;
  switch (action) {
    case kMergeLaneLeft:
      c.lane = 0;
      break;
    case kMergeLaneRight:
      if (c.pos < cfg.merge_point) c.lane = 1;
      break;
    case kMergeFaster:
      c.speed = std::min(c.speed + 1, cfg.max_speed);
      break;
    case kMergeSlower:
      c.speed = std::max(c.speed - 1, 0);
      break;
    default:
      break;  // idle
  }
  c.pos += c.speed;
  if (c.lane == 1 && c.pos >= cfg.merge_point) c.lane = 0;  // forced merge
  if (c.pos >= cfg.lane_length) c.passed = true;
  return c;
}

MergeCar ClampPassed(const MergeCar& in, const MergeConfig& cfg) {
  MergeCar c = in;
  if (c.passed) {
    c.lane = 0;
    c.pos = cfg.lane_length;
    c.speed = 0;
  }
  return c;
}

std::vector<double> MergeFeatures(const MergeState& st,
                                  const MergeConfig& cfg) {
  std::vector<double> f;
  f.reserve(9);
  for (int i = 0; i < 2; ++i) {
    const MergeCar& c = st.car[i];
    f.push_back(static_cast<double>(c.lane));
    f.push_back(static_cast<double>(c.pos) / cfg.lane_length);
    f.push_back(static_cast<double>(c.speed) / cfg.max_speed);
  }
  // Relative gap, closing speed and lane conflict: the collision boundary
  // is a function of these, which keeps it learnable by a small network.
  f.push_back(static_cast<double>(st.car[0].pos - st.car[1].pos) /
              cfg.lane_length);
  f.push_back(static_cast<double>(st.car[0].speed - st.car[1].speed) /
              cfg.max_speed);
  f.push_back(st.car[0].lane == st.car[1].lane ? 1.0 : 0.0);
  return f;
}

std::string MergeLabel(const MergeState& st) {
  std::ostringstream os;
  for (int i = 0; i < 2; ++i) {
    const MergeCar& c = st.car[i];
    os << (i == 0 ? "L" : "F");
    if (c.passed) {
      os << "passed";
    } else {
      os << c.lane << "." << c.pos << "v" << c.speed;
    }
  }
  os << "f" << st.first;
  return os.str();
}

}  // namespace

MarkovGameModel MakeMergeEnv(const MergeConfig& config) {
  config.Validate();
  MarkovGameModel m;
  m.name = "merge";
  m.num_actions1 = 5;
  m.num_actions2 = 5;
  m.gamma = config.gamma;
  m.horizon = config.horizon;

  // State 0: chance start node (actions ignored, uniform start speeds).
  // State 1: shared absorbing terminal.
  std::map<MergeState, int> ids;
  std::vector<MergeState> states;
  std::vector<int> frontier;
  auto intern = [&](const MergeState& st) {
    auto [it, inserted] = ids.emplace(st, static_cast<int>(states.size()) + 2);
    if (inserted) {
      states.push_back(st);
      frontier.push_back(it->second);
    }
    return it->second;
  };

  std::vector<MergeState> start_states;
  for (int v1 = 1; v1 <= 2; ++v1) {
    for (int v2 = 1; v2 <= 2; ++v2) {
      MergeState st;
      st.car[0] = {0, 0, v1, false};
      st.car[1] = {1, 0, v2, false};
      start_states.push_back(st);
    }
  }
  for (const MergeState& st : start_states) intern(st);

  struct Cell {
    std::vector<std::pair<int, double>> dist;
    std::pair<double, double> reward{0, 0};
  };
  std::map<int, std::vector<Cell>> body;  // state id -> 25 cells

  while (!frontier.empty()) {
    const int sid = frontier.back();
    frontier.pop_back();
    const MergeState st = states[sid - 2];
    std::vector<Cell> cells(25);
    for (int a1 = 0; a1 < 5; ++a1) {
      for (int a2 = 0; a2 < 5; ++a2) {
        Cell& cell = cells[a1 * 5 + a2];
        const MergeCar raw0 = StepCar(st.car[0], a1, config);
        const MergeCar raw1 = StepCar(st.car[1], a2, config);
        MergeState next = st;
        next.car[0] = ClampPassed(raw0, config);
        next.car[1] = ClampPassed(raw1, config);
        const bool both_active = !st.car[0].passed && !st.car[1].passed;
        const bool crash =
            both_active && raw0.lane == raw1.lane && raw0.pos == raw1.pos;
        if (crash) {
          cell.reward = {-10, -10};
          cell.dist = {{1, 1.0}};
          continue;
        }
        double r1 = 0, r2 = 0;
        const bool new1 = raw0.passed && !st.car[0].passed;
        const bool new2 = raw1.passed && !st.car[1].passed;
        if (new1 && new2) {
          // Equal positions past the road were handled as a crash above.
          const bool leader_ahead = raw0.pos > raw1.pos;
          r1 = leader_ahead ? 50 : 10;
          r2 = leader_ahead ? 10 : 50;
          next.first = leader_ahead ? 1 : 2;
          cell.reward = {r1, r2};
          cell.dist = {{1, 1.0}};
          continue;
        }
        if (new1) {
          if (st.first == 0) {
            r1 = 50;
            next.first = 1;
          } else {
            r1 = 10;
          }
        }
        if (new2) {
          if (st.first == 0) {
            r2 = 50;
            next.first = 2;
          } else {
            r2 = 10;
          }
        }
        cell.reward = {r1, r2};
        if (next.car[0].passed && next.car[1].passed) {
          cell.dist = {{1, 1.0}};
        } else {
          cell.dist = {{intern(next), 1.0}};
        }
      }
    }
    body[sid] = std::move(cells);
  }

  m.num_states = static_cast<int>(states.size()) + 2;
  m.start_state = 0;
  m.terminal.assign(m.num_states, false);
  m.terminal[1] = true;
  const size_t total = static_cast<size_t>(m.num_states) * 25;
  m.transitions.resize(total);
  m.rewards.resize(total, {0, 0});
  m.state_labels.assign(m.num_states, "");
  m.state_labels[0] = "start";
  m.state_labels[1] = "terminal";
  m.state_features.assign(m.num_states, std::vector<double>(9, 0.0));
  // Chance start encoded at the mean start speeds; terminal at the far end.
  m.state_features[0] = {0, 0, 0.75, 1, 0, 0.75, 0, 0, 0};
  m.state_features[1] = {0, 1, 0, 0, 1, 0, 0, 0, 1};

  std::vector<std::pair<int, double>> start_dist;
  for (const MergeState& st : start_states) {
    start_dist.push_back({ids.at(st), 0.25});
  }
  for (int a1 = 0; a1 < 5; ++a1) {
    for (int a2 = 0; a2 < 5; ++a2) {
      m.transitions[m.Index(0, a1, a2)] = start_dist;
    }
  }
  for (const auto& [st, sid] : ids) {
    m.state_labels[sid] = MergeLabel(st);
    m.state_features[sid] = MergeFeatures(st, config);
    const auto& cells = body.at(sid);
    for (int k = 0; k < 25; ++k) {
      m.transitions[m.Index(sid, k / 5, k % 5)] = cells[k].dist;
      m.rewards[m.Index(sid, k / 5, k % 5)] = cells[k].reward;
    }
  }
  for (const MergeState& st : start_states) {
    m.eval_start_states.push_back(ids.at(st));
  }
  m.Validate();
  return m;
}

MergeOutcome ClassifyMergeOutcome(const std::vector<Transition>& episode) {
  for (const Transition& t : episode) {
    if (t.r1 == -10 && t.r2 == -10) return MergeOutcome::kCrash;
    if (t.r1 == 50) return MergeOutcome::kLeaderFirst;
    if (t.r2 == 50) return MergeOutcome::kFollowerFirst;
  }
  return MergeOutcome::kNone;
}

std::string MergeOutcomeName(MergeOutcome o) {
  switch (o) {
    case MergeOutcome::kLeaderFirst:
      return "leader_first";
    case MergeOutcome::kFollowerFirst:
      return "follower_first";
    case MergeOutcome::kCrash:
      return "crash";
    default:
      return "none";
  }
}

std::pair<std::vector<double>, std::vector<double>> EvaluateJointPolicy(
    const MarkovGameModel& model, const JointPolicy& policy) {
  model.Validate();
  for (int s = 0; s < model.num_states; ++s) {
    if (model.terminal[s]) continue;
    if (policy.a1[s] < 0 || policy.a2[s] < 0) {
      throw std::invalid_argument(
          "EvaluateJointPolicy: policy undefined at a non-terminal state");
    }
  }
  std::vector<double> v1(model.num_states, 0.0), v2(model.num_states, 0.0);
  for (int iter = 0; iter < 2000000; ++iter) {
    double delta = 0;
    for (int s = 0; s < model.num_states; ++s) {
      if (model.terminal[s]) continue;
      const int idx = model.Index(s, policy.a1[s], policy.a2[s]);
      double n1 = model.rewards[idx].first;
      double n2 = model.rewards[idx].second;
      for (const auto& [next, p] : model.transitions[idx]) {
        n1 += model.gamma * p * v1[next];
        n2 += model.gamma * p * v2[next];
      }
      delta = std::max(delta, std::abs(n1 - v1[s]));
      delta = std::max(delta, std::abs(n2 - v2[s]));
      v1[s] = n1;
      v2[s] = n2;
    }
    if (delta < kEvalTolerance) break;
  }
  return {v1, v2};
}

namespace {

// Exact follower best response to a fixed leader policy, follower ties in
// the leader's favor then by lowest index.
JointPolicy FollowerBestResponse(const MarkovGameModel& model,
                                 const std::vector<int>& leader_policy) {
  const int S = model.num_states;
  const int n2 = model.num_actions2;
  std::vector<double> v2(S, 0.0);
  auto q2 = [&](int s, int a2) {
    const int idx = model.Index(s, leader_policy[s], a2);
    double q = model.rewards[idx].second;
    for (const auto& [next, p] : model.transitions[idx]) {
      q += model.gamma * p * v2[next];
    }
    return q;
  };
  for (int iter = 0; iter < 100000; ++iter) {
    double delta = 0;
    for (int s = 0; s < S; ++s) {
      if (model.terminal[s]) continue;
      double best = q2(s, 0);
      for (int a2 = 1; a2 < n2; ++a2) best = std::max(best, q2(s, a2));
      delta = std::max(delta, std::abs(best - v2[s]));
      v2[s] = best;
    }
    if (delta < kEvalTolerance) break;
  }
  // Follower-optimal action sets.
  std::vector<std::vector<int>> opt(S);
  for (int s = 0; s < S; ++s) {
    if (model.terminal[s]) continue;
    for (int a2 = 0; a2 < n2; ++a2) {
      if (q2(s, a2) >= v2[s] - 1e-9) opt[s].push_back(a2);
    }
  }
  // Leader-favorable selection among indifferent follower actions.
  std::vector<double> v1(S, 0.0);
  auto q1 = [&](int s, int a2) {
    const int idx = model.Index(s, leader_policy[s], a2);
    double q = model.rewards[idx].first;
    for (const auto& [next, p] : model.transitions[idx]) {
      q += model.gamma * p * v1[next];
    }
    return q;
  };
  for (int iter = 0; iter < 100000; ++iter) {
    double delta = 0;
    for (int s = 0; s < S; ++s) {
      if (model.terminal[s]) continue;
      double best = q1(s, opt[s][0]);
      for (size_t k = 1; k < opt[s].size(); ++k) {
        best = std::max(best, q1(s, opt[s][k]));
      }
      delta = std::max(delta, std::abs(best - v1[s]));
      v1[s] = best;
    }
    if (delta < kEvalTolerance) break;
  }
  JointPolicy policy;
  policy.a1.assign(S, -1);
  policy.a2.assign(S, -1);
  for (int s = 0; s < S; ++s) {
    if (model.terminal[s]) continue;
    policy.a1[s] = leader_policy[s];
    int choice = opt[s][0];
    double best = q1(s, choice);
    for (size_t k = 1; k < opt[s].size(); ++k) {
      const double q = q1(s, opt[s][k]);
      if (q > best + 1e-9) {
        best = q;
        choice = opt[s][k];
      }
    }
    policy.a2[s] = choice;
  }
  return policy;
}

}  // namespace

BirlSolution BirlOracle(const MarkovGameModel& model,
                        const std::vector<int>* leader_groups) {
  model.Validate();
  const int S = model.num_states;
  std::vector<int> groups(S);
  int num_groups = 0;
  if (leader_groups != nullptr) {
    groups = *leader_groups;
    for (int s = 0; s < S; ++s) {
      if (!model.terminal[s]) num_groups = std::max(num_groups, groups[s] + 1);
    }
  } else {
    for (int s = 0; s < S; ++s) {
      groups[s] = model.terminal[s] ? -1 : num_groups++;
    }
  }
  double combos = 1;
  for (int g = 0; g < num_groups; ++g) {
    combos *= model.num_actions1;
    if (combos > 1e6) {
      throw std::length_error("BirlOracle: leader policy space too large");
    }
  }

  BirlSolution best;
  bool have_best = false;
  std::vector<int> assign(num_groups, 0);
  std::vector<int> leader_policy(S, 0);
  while (true) {
    for (int s = 0; s < S; ++s) {
      leader_policy[s] = model.terminal[s] ? -1 : assign[groups[s]];
    }
    JointPolicy policy = FollowerBestResponse(model, leader_policy);
    auto [v1, v2] = EvaluateJointPolicy(model, policy);
    if (!have_best || v1[model.start_state] > best.leader_value + 1e-12) {
      best.policy = policy;
      best.leader_value = v1[model.start_state];
      best.follower_value = v2[model.start_state];
      have_best = true;
    }
    // Mixed-radix increment, lowest group fastest.
    int g = 0;
    while (g < num_groups) {
      if (++assign[g] < model.num_actions1) break;
      assign[g] = 0;
      ++g;
    }
    if (g == num_groups) break;
    if (num_groups == 0) break;
  }
  return best;
}

nlohmann::json ModelToJson(const MarkovGameModel& model) {
  nlohmann::json j;
  j["name"] = model.name;
  j["num_states"] = model.num_states;
  j["num_actions1"] = model.num_actions1;
  j["num_actions2"] = model.num_actions2;
  j["start_state"] = model.start_state;
  j["gamma"] = model.gamma;
  j["horizon"] = model.horizon;
  j["terminal"] = std::vector<int>(model.terminal.begin(), model.terminal.end());
  j["state_labels"] = model.state_labels;
  j["state_features"] = model.state_features;
  j["eval_start_states"] = model.eval_start_states;
  nlohmann::json trans = nlohmann::json::array();
  nlohmann::json rew = nlohmann::json::array();
  for (int s = 0; s < model.num_states; ++s) {
    if (model.terminal[s]) continue;
    for (int a1 = 0; a1 < model.num_actions1; ++a1) {
      for (int a2 = 0; a2 < model.num_actions2; ++a2) {
        const int idx = model.Index(s, a1, a2);
        for (const auto& [next, p] : model.transitions[idx]) {
          trans.push_back({s, a1, a2, next, p});
        }
        const auto& [r1, r2] = model.rewards[idx];
        rew.push_back({s, a1, a2, r1, r2});
      }
    }
  }
  j["transitions"] = trans;
  j["rewards"] = rew;
  return j;
}

MarkovGameModel ModelFromJson(const nlohmann::json& j) {
  MarkovGameModel m;
  m.name = j.value("name", "");
  m.num_states = j.at("num_states").get<int>();
  m.num_actions1 = j.at("num_actions1").get<int>();
  m.num_actions2 = j.at("num_actions2").get<int>();
  m.start_state = j.at("start_state").get<int>();
  m.gamma = j.at("gamma").get<double>();
  m.horizon = j.value("horizon", 0);
  for (int t : j.at("terminal").get<std::vector<int>>()) {
    m.terminal.push_back(t != 0);
  }
  m.state_labels = j.value("state_labels", std::vector<std::string>{});
  m.state_features =
      j.value("state_features", std::vector<std::vector<double>>{});
  m.eval_start_states = j.value("eval_start_states", std::vector<int>{});
  const size_t cells =
      static_cast<size_t>(m.num_states) * m.num_actions1 * m.num_actions2;
  m.transitions.resize(cells);
  m.rewards.resize(cells, {0, 0});
  for (const auto& row : j.at("transitions")) {
    const int idx = m.Index(row.at(0), row.at(1), row.at(2));
    m.transitions[idx].push_back({row.at(3).get<int>(), row.at(4).get<double>()});
  }
  for (const auto& row : j.at("rewards")) {
    const int idx = m.Index(row.at(0), row.at(1), row.at(2));
    m.rewards[idx] = {row.at(3).get<double>(), row.at(4).get<double>()};
  }
  m.Validate();
  return m;
}

std::string TransitionToJsonLine(const Transition& t) {
  nlohmann::json j = {{"s", t.s},       {"a1", t.a1}, {"a2", t.a2},
                      {"s_next", t.s_next}, {"r1", t.r1}, {"r2", t.r2},
                      {"done", t.done}};
  return j.dump();
}

}  // namespace stackeq
