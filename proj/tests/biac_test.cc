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

#include "stackeq/biac.h"
#include "stackeq/common.h"
#include "stackeq/markov_game.h"

namespace stackeq {
namespace {

Eigen::VectorXd Feat(const MarkovGameModel& model, int s) {
  const std::vector<double> f = model.Features(s);
  return Eigen::Map<const Eigen::VectorXd>(f.data(),
                                           static_cast<int>(f.size()));
}

TEST_CASE("action selection maximizes the leader critic over actor replies") {
  // Lookup-table critic and actor over a 3x3 stage: the actor replies
  // X to A, Y to B, Z to C; the leader values are 20 / 10 / 5.
  const Eigen::MatrixXd u1 = [] {
    Eigen::MatrixXd m(3, 3);
    m << 20, 0, 0, 30, 10, 0, 0, 0, 5;
    return m;
  }();
  auto q1 = [&](const Eigen::VectorXd&, int a1, const Eigen::VectorXd& a2v) {
    int a2;
    a2v.maxCoeff(&a2);
    return u1(a1, a2);
  };
  auto actor = [](const Eigen::VectorXd&, int a1) {
    Eigen::VectorXd logits = Eigen::VectorXd::Zero(3);
    logits[a1] = 1.0;  // reply mirrors the leader action
    return logits;
  };
  const Eigen::VectorXd state = Eigen::VectorXd::Zero(2);
  const auto [a1, a2] = SelectNextActions(q1, actor, state, 3, 3);
  // Replies on the diagonal value 20 / 10 / 5: leader takes row 0.
  CHECK(a1 == 0);
  CHECK(a2 == 0);
}

TEST_CASE("action selection breaks leader ties lexicographically") {
  auto q1 = [](const Eigen::VectorXd&, int, const Eigen::VectorXd&) {
    return 1.0;
  };
  auto actor = [](const Eigen::VectorXd&, int) {
    Eigen::VectorXd logits(2);
    logits << 0.0, 2.0;
    return logits;
  };
  const auto [a1, a2] = SelectNextActions(q1, actor, Eigen::VectorXd::Zero(1),
                                          4, 2);
  CHECK(a1 == 0);
  CHECK(a2 == 1);  // actor argmax
}

TEST_CASE("network-backed selection agrees with the functional form") {
  auto rng = MakeRng(201);
  const BiACParams params = MakeBiacParams(3, 4, 5, 16, rng);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd state(3);
    for (int i = 0; i < 3; ++i) state[i] = n(rng);
    const auto net = SelectNextActions(params, state);
    const auto fn = SelectNextActions(
        [&](const Eigen::VectorXd& s, int a1, const Eigen::VectorXd& a2v) {
          int a2;
          a2v.maxCoeff(&a2);
          return CriticValue(params.q1, params, s, a1, a2);
        },
        [&](const Eigen::VectorXd& s, int a1) {
          return ActorLogits(params, s, a1);
        },
        state, 4, 5);
    CHECK(net == fn);
  }
}

TEST_CASE("critic update reduces the batch TD error") {
  auto rng = MakeRng(202);
  BiACParams params = MakeBiacParams(2, 2, 2, 16, rng);
  std::vector<BiacTransition> batch;
  for (int i = 0; i < 16; ++i) {
    BiacTransition t;
    const int si = (i / 4) % 2;
    t.s = Eigen::VectorXd::Unit(2, si);
    t.s_next = t.s;
    t.a1 = i % 2;
    t.a2 = (i / 2) % 2;
    // Deterministic per-cell targets: realizable exactly.
    t.r1 = 0.8 * t.a1 - 0.5 * t.a2 + 0.3 * si;
    t.r2 = -0.4 * t.a1 + 0.9 * t.a2 - 0.2 * si;
    t.done = true;  // fixed regression targets
    batch.push_back(t);
  }
  auto mse = [&]() {
    double e = 0;
    for (const BiacTransition& t : batch) {
      const double p1 = CriticValue(params.q1, params, t.s, t.a1, t.a2);
      const double p2 = CriticValue(params.q2, params, t.s, t.a1, t.a2);
      e += (p1 - t.r1) * (p1 - t.r1) + (p2 - t.r2) * (p2 - t.r2);
    }
    return e / batch.size();
  };
  const double before = mse();
  SgdOptimizer opt1(0.02), opt2(0.02);
  for (int it = 0; it < 500; ++it) {
    CriticUpdate(params, batch, opt1, opt2, 0.9);
  }
  CHECK(mse() < 0.05 * before);
}

TEST_CASE("actor update raises the probability of high-value replies") {
  auto rng = MakeRng(203);
  BiACParams params = MakeBiacParams(2, 2, 3, 16, rng);
  // Teach the follower critic that reply 2 under leader action 1 pays 5.
  std::vector<BiacTransition> critic_batch;
  for (int a2 = 0; a2 < 3; ++a2) {
    BiacTransition t;
    t.s = Eigen::VectorXd::Unit(2, 0);
    t.s_next = t.s;
    t.a1 = 1;
    t.a2 = a2;
    t.r1 = 0;
    t.r2 = a2 == 2 ? 5.0 : 0.0;
    t.done = true;
    critic_batch.push_back(t);
  }
  SgdOptimizer opt1(0.05), opt2(0.05);
  for (int it = 0; it < 300; ++it) {
    CriticUpdate(params, critic_batch, opt1, opt2, 0.9);
  }
  const Eigen::VectorXd s = Eigen::VectorXd::Unit(2, 0);
  const double before = Softmax(ActorLogits(params, s, 1))[2];
  SgdOptimizer opt_actor(0.05);
  std::vector<BiacTransition> actor_batch;
  BiacTransition t = critic_batch[2];  // the rewarded reply
  actor_batch.assign(8, t);
  for (int it = 0; it < 50; ++it) {
    ActorUpdate(params, actor_batch, opt_actor);
  }
  const double after = Softmax(ActorLogits(params, s, 1))[2];
  CHECK(after > before);
  CHECK(after > 0.9);
}

TEST_CASE("decentralized execution equals centralized on every env") {
  for (const MarkovGameModel& env :
       {MakeMatrixEnv(EscapeGame()), MakeMatrixEnv(MaintainGame()),
        MakeGridEnv(), MakeCounterexampleEnv(), MakeMergeEnv()}) {
    auto rng = MakeRng(204);
    const BiACParams params = MakeBiacParams(
        env.FeatureDim(), env.num_actions1, env.num_actions2, 16, rng);
    const ExecutionStats c = ExecuteCentralized(params, env, 8, 99);
    const ExecutionStats d = ExecuteDecentralized(params, env, 8, 99);
    REQUIRE(c.actions.size() == d.actions.size());
    for (size_t ep = 0; ep < c.actions.size(); ++ep) {
      CHECK(c.actions[ep] == d.actions[ep]);
    }
    CHECK(c.mean_ret1 == d.mean_ret1);
    CHECK(c.leader_first == d.leader_first);
  }
}

TEST_CASE("training is deterministic per seed") {
  const MarkovGameModel env = MakeMatrixEnv(EscapeGame());
  BiACConfig cfg;
  cfg.episodes = 60;
  cfg.warmup_steps = 30;
  cfg.hidden = 8;
  cfg.seed = 5;
  const BiacTrainResult a = TrainBiac(env, cfg);
  const BiacTrainResult b = TrainBiac(env, cfg);
  CHECK(a.record.ToCsv() == b.record.ToCsv());
  CHECK(a.params.q1.weights[0] == b.params.q1.weights[0]);
  cfg.seed = 6;
  const BiacTrainResult c = TrainBiac(env, cfg);
  CHECK(a.record.ToCsv() != c.record.ToCsv());
}

TEST_CASE("config validation") {
  BiACConfig cfg;
  cfg.beta = 0;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  cfg = BiACConfig{};
  cfg.buffer_capacity = cfg.batch_size - 1;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  cfg = BiACConfig{};
  cfg.gumbel.final_value = 0;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
  cfg = BiACConfig{};
  cfg.reward_scale = -1;
  CHECK_THROWS_AS(cfg.Validate(), std::invalid_argument);
}

TEST_CASE("temperature anneals linearly to its floor") {
  GumbelConfig g;
  g.initial = 1.0;
  g.final_value = 0.1;
  CHECK(g.At(0, 100) == doctest::Approx(1.0));
  CHECK(g.At(50, 100) == doctest::Approx(0.55));
  CHECK(g.At(100, 100) == doctest::Approx(0.1));
  CHECK(g.At(500, 100) == doctest::Approx(0.1));
}

TEST_CASE("params serialize with a manifest") {
  auto rng = MakeRng(205);
  const BiACParams params = MakeBiacParams(2, 3, 3, 8, rng);
  const BiACParams back = BiacParamsFromJson(BiacParamsToJson(params));
  const Eigen::VectorXd s = Eigen::VectorXd::Unit(2, 1);
  CHECK(SelectNextActions(params, s) == SelectNextActions(back, s));
  CHECK(CriticValue(params.q2, params, s, 1, 2) ==
        CriticValue(back.q2, back, s, 1, 2));

  BiACConfig cfg;
  cfg.seed = 31;
  const nlohmann::json ckpt = BiacCheckpoint(params, "escape", cfg);
  CHECK(ckpt.at("manifest").at("env") == "escape");
  CHECK(ckpt.at("manifest").at("seed") == 31);
  CHECK(ckpt.at("manifest").contains("config_hash"));
  CHECK(ckpt.contains("params"));
}

TEST_CASE("greedy play converges to the stage solution on escape") {
  const MarkovGameModel env = MakeMatrixEnv(EscapeGame());
  BiACConfig cfg;
  cfg.hidden = 32;
  cfg.episodes = 2000;
  cfg.warmup_steps = 300;
  cfg.seed = 2;
  const BiacTrainResult r = TrainBiac(env, cfg);
  const auto [a1, a2] = SelectNextActions(r.params, Feat(env, 0));
  CHECK(a1 == 2);
  CHECK(a2 == 2);
  // The greedy cell's leader critic approaches the true payoff.
  CHECK(CriticValue(r.params.q1, r.params, Feat(env, 0), 2, 2) ==
        doctest::Approx(30.0).epsilon(0.05));
}

}  // namespace
}  // namespace stackeq
