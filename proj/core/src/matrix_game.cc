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

#include "stackeq/matrix_game.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "stackeq/common.h"

namespace stackeq {

void MatrixGame::Validate() const {
  if (u1.rows() == 0 || u1.cols() == 0) {
    throw std::invalid_argument("MatrixGame: empty payoff matrix");
  }
  if (u1.rows() != u2.rows() || u1.cols() != u2.cols()) {
    throw std::invalid_argument("MatrixGame: payoff shape mismatch");
  }
  if (!u1.allFinite() || !u2.allFinite()) {
    throw std::invalid_argument("MatrixGame: non-finite payoff entry");
  }
}

int BestResponse(const MatrixGame& game, int leader_action) {
  game.Validate();
  if (leader_action < 0 || leader_action >= game.NumLeaderActions()) {
    throw std::out_of_range("BestResponse: leader action out of range");
  }
  const int m = game.NumFollowerActions();
  int best = 0;
  for (int a2 = 1; a2 < m; ++a2) {
    const double v = game.u2(leader_action, a2);
    const double vb = game.u2(leader_action, best);
    if (v > vb) {
      best = a2;
    } else if (v == vb &&
               game.u1(leader_action, a2) > game.u1(leader_action, best)) {
      best = a2;  // follower indifferent, favor the leader
    }
  }
  return best;
}

StackelbergSolution SolveStackelberg(const MatrixGame& game) {
  game.Validate();
  const int n = game.NumLeaderActions();
  StackelbergSolution sol;
  sol.leader_action = 0;
  sol.follower_action = BestResponse(game, 0);
  for (int a1 = 1; a1 < n; ++a1) {
    const int br = BestResponse(game, a1);
    if (game.u1(a1, br) > game.u1(sol.leader_action, sol.follower_action)) {
      sol.leader_action = a1;
      sol.follower_action = br;
    }
  }
  sol.leader_payoff = game.u1(sol.leader_action, sol.follower_action);
  sol.follower_payoff = game.u2(sol.leader_action, sol.follower_action);
  return sol;
}

PureNashSet EnumeratePureNash(const MatrixGame& game) {
  game.Validate();
  const int n = game.NumLeaderActions();
  const int m = game.NumFollowerActions();
  PureNashSet out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      bool nash = true;
      for (int k = 0; k < n && nash; ++k) {
        if (k != i && game.u1(k, j) >= game.u1(i, j)) nash = false;
      }
      for (int l = 0; l < m && nash; ++l) {
        if (l != j && game.u2(i, l) >= game.u2(i, j)) nash = false;
      }
      if (nash) out.points.emplace_back(i, j);
    }
  }
  return out;
}

std::pair<int, double> SolveMinimax(const MatrixGame& game) {
  game.Validate();
  int best = 0;
  double best_value = game.u1.row(0).minCoeff();
  for (int a1 = 1; a1 < game.NumLeaderActions(); ++a1) {
    const double v = game.u1.row(a1).minCoeff();
    if (v > best_value) {
      best = a1;
      best_value = v;
    }
  }
  return {best, best_value};
}

double CooperationLevel(const MatrixGame& game) {
  game.Validate();
  const double n = static_cast<double>(game.u1.size());
  const double m1 = game.u1.mean();
  const double m2 = game.u2.mean();
  const Eigen::ArrayXXd d1 = game.u1.array() - m1;
  const Eigen::ArrayXXd d2 = game.u2.array() - m2;
  const double var1 = (d1 * d1).sum() / n;
  const double var2 = (d2 * d2).sum() / n;
  if (var1 <= 0 || var2 <= 0) {
    throw std::domain_error("CooperationLevel: constant payoff matrix");
  }
  const double cov = (d1 * d2).sum() / n;
  return cov / std::sqrt(var1 * var2);
}

MatrixGame SampleRandomGame(int size_n, double covariance,
                            std::mt19937_64& rng) {
  if (size_n < 1) {
    throw std::invalid_argument("SampleRandomGame: size_n must be positive");
  }
  if (covariance < -1.0 || covariance > 1.0) {
    throw std::invalid_argument("SampleRandomGame: |covariance| > 1");
  }
  // Cholesky of [[1, c], [c, 1]].
  const double c = covariance;
  const double root = std::sqrt(std::max(0.0, 1.0 - c * c));
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixGame game;
  game.u1.resize(size_n, size_n);
  game.u2.resize(size_n, size_n);
  for (int i = 0; i < size_n; ++i) {
    for (int j = 0; j < size_n; ++j) {
      const double z1 = normal(rng);
      const double z2 = normal(rng);
      game.u1(i, j) = z1;
      game.u2(i, j) = c * z1 + root * z2;
    }
  }
  return game;
}

void StudyConfig::Validate() const {
  if (size_n < 1) throw std::invalid_argument("StudyConfig: size_n < 1");
  if (trials < 1) throw std::invalid_argument("StudyConfig: trials < 1");
  for (double c : covariances) {
    if (c < -1.0 || c > 1.0) {
      throw std::invalid_argument("StudyConfig: |covariance| > 1");
    }
  }
}

StudyResult SeVsNeStudy(const StudyConfig& config) {
  config.Validate();
  StudyResult result;
  uint64_t stream = 0;
  for (double cov : config.covariances) {
    StudyRow row;
    row.covariance = cov;
    int trials_with_ne = 0;
    double ne_count_total = 0;
    for (int trial = 0; trial < config.trials; ++trial) {
      auto rng = MakeRng(config.seed, stream++);
      const MatrixGame game = SampleRandomGame(config.size_n, cov, rng);
      const StackelbergSolution se = SolveStackelberg(game);
      row.se_leader += se.leader_payoff;
      row.se_follower += se.follower_payoff;
      const PureNashSet nash = EnumeratePureNash(game);
      ne_count_total += static_cast<double>(nash.points.size());
      if (!nash.points.empty()) {
        ++trials_with_ne;
        double l = 0, f = 0;
        for (const auto& [a1, a2] : nash.points) {
          l += game.u1(a1, a2);
          f += game.u2(a1, a2);
        }
        row.ne_leader += l / nash.points.size();
        row.ne_follower += f / nash.points.size();
      }
    }
    row.se_leader /= config.trials;
    row.se_follower /= config.trials;
    row.ne_count = ne_count_total / config.trials;
    row.ne_exists_frac = static_cast<double>(trials_with_ne) / config.trials;
    if (trials_with_ne > 0) {
      row.ne_leader /= trials_with_ne;
      row.ne_follower /= trials_with_ne;
    }
    result.rows.push_back(row);
  }
  return result;
}

std::string StudyResult::ToCsv() const {
  std::ostringstream os;
  os.precision(17);
  os << "covariance,se_leader,se_follower,ne_leader,ne_follower,ne_count,"
        "ne_exists_frac\n";
  for (const StudyRow& r : rows) {
    os << r.covariance << ',' << r.se_leader << ',' << r.se_follower << ','
       << r.ne_leader << ',' << r.ne_follower << ',' << r.ne_count << ','
       << r.ne_exists_frac << '\n';
  }
  return os.str();
}

MatrixGame EscapeGame() {
  MatrixGame g;
  g.u1.resize(3, 3);
  g.u2.resize(3, 3);
  g.u1 << 15, 10, 0,
          10, 10, 0,
           0,  0, 30;
  g.u2 = g.u1;
  return g;
}

MatrixGame MaintainGame() {
  MatrixGame g;
  g.u1.resize(3, 3);
  g.u2.resize(3, 3);
  g.u1 << 20,  0, 0,
          30, 10, 0,
           0,  0, 5;
  g.u2 << 15, 0,  0,
           0, 5,  0,
           0, 0, 10;
  return g;
}

nlohmann::json MatrixGameToJson(const MatrixGame& game) {
  game.Validate();
  nlohmann::json j;
  for (int i = 0; i < game.NumLeaderActions(); ++i) {
    nlohmann::json r1 = nlohmann::json::array();
    nlohmann::json r2 = nlohmann::json::array();
    for (int k = 0; k < game.NumFollowerActions(); ++k) {
      r1.push_back(game.u1(i, k));
      r2.push_back(game.u2(i, k));
    }
    j["u1"].push_back(r1);
    j["u2"].push_back(r2);
  }
  return j;
}

MatrixGame MatrixGameFromJson(const nlohmann::json& j) {
  const auto& u1 = j.at("u1");
  const auto& u2 = j.at("u2");
  if (u1.empty() || u1[0].empty()) {
    throw std::invalid_argument("MatrixGameFromJson: empty matrix");
  }
  MatrixGame game;
  const int n = static_cast<int>(u1.size());
  const int m = static_cast<int>(u1[0].size());
  game.u1.resize(n, m);
  game.u2.resize(n, m);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) {
      game.u1(i, k) = u1.at(i).at(k).get<double>();
      game.u2(i, k) = u2.at(i).at(k).get<double>();
    }
  }
  game.Validate();
  return game;
}

}  // namespace stackeq
