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

#include <cmath>

#include <nlohmann/json.hpp>

#include "stackeq/common.h"
#include "stackeq/markov_game.h"
#include "stackeq/tabular.h"

namespace stackeq {
namespace {

QTable RandomQ(const MarkovGameModel& model, std::mt19937_64& rng,
               bool identical_payoffs) {
  QTable q(model.num_states, model.num_actions1, model.num_actions2);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (size_t i = 0; i < q.q1.size(); ++i) {
    q.q1[i] = u(rng);
    q.q2[i] = identical_payoffs ? q.q1[i] : u(rng);
  }
  return q;
}

TEST_CASE("td update arithmetic") {
  const MarkovGameModel env = MakeMatrixEnv(EscapeGame());
  QTable q(env.num_states, 3, 3);
  // Terminal next state: plain convex step toward the reward.
  Transition t{0, 2, 2, 1, 30.0, 30.0, true};
  TdUpdate(q, t, 0.5, 0.25, env.gamma);
  CHECK(q.Q1(0, 2, 2) == doctest::Approx(15.0));
  CHECK(q.Q2(0, 2, 2) == doctest::Approx(7.5));
  // Only the visited cell moves.
  CHECK(q.Q1(0, 0, 0) == 0.0);
  CHECK(q.Q2(0, 1, 2) == 0.0);
}

TEST_CASE("td update bootstraps the stage solution at the next state") {
  const MarkovGameModel env = MakeCounterexampleEnv();
  QTable q(2, 2, 2);
  // Give s1's stage game a known solution: (A, B) with payoffs (3, 4).
  q.Q1(0, 0, 1) = 3.0;
  q.Q2(0, 0, 1) = 4.0;
  Transition t{0, 1, 1, 0, -1.0, -1.0, false};  // (B, B) self-loop
  TdUpdate(q, t, 1.0, 1.0, 0.5);
  CHECK(q.Q1(0, 1, 1) == doctest::Approx(-1.0 + 0.5 * 3.0));
  CHECK(q.Q2(0, 1, 1) == doctest::Approx(-1.0 + 0.5 * 4.0));
}

TEST_CASE("stage actions equal the matrix solver on random stage games") {
  const MarkovGameModel grid = MakeGridEnv();
  auto rng = MakeRng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const QTable q = RandomQ(grid, rng, false);
    for (int s = 0; s < grid.num_states; s += 3) {
      const auto [a1, a2] = StageActions(q, s);
      const StackelbergSolution sol = SolveStackelberg(q.Stage(s));
      CHECK(a1 == sol.leader_action);
      CHECK(a2 == sol.follower_action);
    }
  }
}

TEST_CASE("bellman operator contracts on identical-payoff models") {
  // With Q1 == Q2 per pair, the stage Stackelberg payoff is a plain max,
  // and |max A - max B| <= max |A - B| gives the gamma factor exactly.
  MarkovGameModel env = MakeGridEnv();
  auto rng = MakeRng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const QTable qa = RandomQ(env, rng, true);
    const QTable qb = RandomQ(env, rng, true);
    double dq = 0;
    for (size_t i = 0; i < qa.q1.size(); ++i) {
      dq = std::max(dq, std::abs(qa.q1[i] - qb.q1[i]));
    }
    const QTable ta = BilevelBellmanOperator(env, qa);
    const QTable tb = BilevelBellmanOperator(env, qb);
    double dt = 0;
    for (size_t i = 0; i < ta.q1.size(); ++i) {
      dt = std::max(dt, std::abs(ta.q1[i] - tb.q1[i]));
    }
    CHECK(dt <= env.gamma * dq + 1e-12);
  }
}

TEST_CASE("value iteration fixed point satisfies the bellman identity") {
  for (const MarkovGameModel& env :
       {MakeMatrixEnv(EscapeGame()), MakeCounterexampleEnv(), MakeGridEnv()}) {
    const ValueIterationResult vi = BilevelValueIteration(env);
    CHECK(vi.converged);
    const QTable tq = BilevelBellmanOperator(env, vi.q);
    for (size_t i = 0; i < tq.q1.size(); ++i) {
      CHECK(std::abs(tq.q1[i] - vi.q.q1[i]) < 1e-8);
      CHECK(std::abs(tq.q2[i] - vi.q.q2[i]) < 1e-8);
    }
  }
}

TEST_CASE("value iteration on a one-step env recovers the stage game") {
  const MarkovGameModel env = MakeMatrixEnv(MaintainGame());
  const ValueIterationResult vi = BilevelValueIteration(env);
  CHECK(vi.policy.a1[0] == 0);
  CHECK(vi.policy.a2[0] == 0);
  CHECK(vi.v1[0] == doctest::Approx(20.0));
  CHECK(vi.v2[0] == doctest::Approx(15.0));
  const MatrixGame g = MaintainGame();
  for (int a1 = 0; a1 < 3; ++a1) {
    for (int a2 = 0; a2 < 3; ++a2) {
      CHECK(vi.q.Q1(0, a1, a2) == doctest::Approx(g.u1(a1, a2)));
      CHECK(vi.q.Q2(0, a1, a2) == doctest::Approx(g.u2(a1, a2)));
    }
  }
}

TEST_CASE("committed counterexample Q* has zero expected TD residual") {
  const MarkovGameModel env = MakeCounterexampleEnv();
  const auto [qstar, v] = CounterexampleQStar(env.gamma);
  QTable q(2, 2, 2);
  for (int a1 = 0; a1 < 2; ++a1) {
    for (int a2 = 0; a2 < 2; ++a2) {
      q.Q1(0, a1, a2) = qstar.u1(a1, a2);
      q.Q2(0, a1, a2) = qstar.u2(a1, a2);
    }
  }
  // Every (s1, a1, a2) cell: r + gamma * Q(s', stage pair) equals Q exactly,
  // so a TD update leaves the table unchanged for any learning rate.
  auto rng = MakeRng(23);
  for (int a1 = 0; a1 < 2; ++a1) {
    for (int a2 = 0; a2 < 2; ++a2) {
      QTable before = q;
      const Transition t = EnvStep(env, 0, a1, a2, rng);
      TdUpdate(q, t, 0.7, 0.7, env.gamma);
      for (size_t i = 0; i < q.q1.size(); ++i) {
        CHECK(q.q1[i] == doctest::Approx(before.q1[i]).epsilon(1e-12));
        CHECK(q.q2[i] == doctest::Approx(before.q2[i]).epsilon(1e-12));
      }
    }
  }
  // A perturbed table is no longer a fixed point.
  q.Q1(0, 0, 0) += 1.0;
  const QTable tq = BilevelBellmanOperator(env, q);
  double residual = 0;
  for (size_t i = 0; i < q.q1.size(); ++i) {
    residual = std::max(residual, std::abs(tq.q1[i] - q.q1[i]));
  }
  CHECK(residual > 1e-3);
}

TEST_CASE("bilevel q learning is deterministic per seed") {
  const MarkovGameModel env = MakeMatrixEnv(EscapeGame());
  TabularConfig cfg;
  cfg.episodes = 300;
  cfg.warmup_steps = 100;
  cfg.seed = 77;
  const TabularTrainResult a = TrainBilevelQ(env, cfg);
  const TabularTrainResult b = TrainBilevelQ(env, cfg);
  CHECK(a.record.ToCsv() == b.record.ToCsv());
  CHECK(a.q.q1 == b.q.q1);
  cfg.seed = 78;
  const TabularTrainResult c = TrainBilevelQ(env, cfg);
  CHECK(a.record.ToCsv() != c.record.ToCsv());
}

TEST_CASE("trained stage values approach the payoff matrix") {
  const MarkovGameModel env = MakeMatrixEnv(EscapeGame());
  TabularConfig cfg;
  cfg.episodes = 3000;
  cfg.warmup_steps = 500;
  cfg.seed = 3;
  const TabularTrainResult r = TrainBilevelQ(env, cfg);
  CHECK(r.policy.a1[0] == 2);
  CHECK(r.policy.a2[0] == 2);
  CHECK(r.record.converged);
  // The greedy cell is trained to the correct estimated value.
  CHECK(r.q.Q1(0, 2, 2) == doctest::Approx(30.0).epsilon(0.01));
  CHECK(r.q.Q2(0, 2, 2) == doctest::Approx(30.0).epsilon(0.01));
}

TEST_CASE("grid training matches value iteration play") {
  const MarkovGameModel grid = MakeGridEnv();
  const ValueIterationResult vi = BilevelValueIteration(grid);
  TabularConfig cfg;
  cfg.episodes = 3000;
  cfg.warmup_steps = 3000;
  cfg.seed = 5;
  const TabularTrainResult r = TrainBilevelQ(grid, cfg);
  const GreedyEval train_eval = EvaluateGreedy(grid, [&](int s) {
    return std::make_pair(r.policy.a1[s], r.policy.a2[s]);
  });
  const GreedyEval vi_eval = EvaluateGreedy(grid, [&](int s) {
    return std::make_pair(vi.policy.a1[s], vi.policy.a2[s]);
  });
  CHECK(train_eval.outcome == "both_at_20");
  CHECK(vi_eval.outcome == "both_at_20");
  CHECK(train_eval.ret1 == doctest::Approx(vi_eval.ret1));
}

TEST_CASE("independent learners miss the commitment point on maintain") {
  const MarkovGameModel env = MakeMatrixEnv(MaintainGame());
  TabularConfig cfg;
  cfg.episodes = 3000;
  cfg.warmup_steps = 500;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    const IndependentTrainResult r = TrainIndependentQ(env, cfg);
    const bool at_se = r.policy.a1[0] == 0 && r.policy.a2[0] == 0;
    CHECK_FALSE(at_se);
  }
}

TEST_CASE("config validation") {
  TabularConfig cfg;
  cfg.alpha1 = 0.0;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  cfg = TabularConfig{};
  cfg.episodes = 0;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  cfg = TabularConfig{};
  cfg.eps.initial = 1.5;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
}

TEST_CASE("q table json round trip") {
  const MarkovGameModel grid = MakeGridEnv();
  auto rng = MakeRng(31);
  const QTable q = RandomQ(grid, rng, false);
  const QTable back = QTableFromJson(QTableToJson(q));
  CHECK(back.q1 == q.q1);
  CHECK(back.q2 == q.q2);
  CHECK(back.num_states == q.num_states);
}

TEST_CASE("convergence verdict requires a stable tail") {
  std::vector<EpisodeLog> eps(100);
  for (int i = 0; i < 100; ++i) {
    eps[i].policy_hash = 42;
  }
  CHECK(ConvergedOverTail(eps));
  eps[95].policy_hash = 7;
  CHECK_FALSE(ConvergedOverTail(eps));
  CHECK_FALSE(ConvergedOverTail({}));
}

}  // namespace
}  // namespace stackeq
