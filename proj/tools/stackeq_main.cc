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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stackeq/bench.h"
#include "stackeq/matrix_game.h"

namespace {

using stackeq::MatrixGame;

MatrixGame LoadGame(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read game file: " + path);
  nlohmann::json j;
  in >> j;
  MatrixGame game = stackeq::MatrixGameFromJson(j);
  game.Validate();
  return game;
}

int RunSolve(const std::string& game_file, bool nash, bool se, bool minimax,
             bool coop) {
  const MatrixGame game = LoadGame(game_file);
  const bool all = !nash && !se && !minimax && !coop;
  nlohmann::json out;
  if (se || all) {
    const auto sol = stackeq::SolveStackelberg(game);
    out["stackelberg"] = {{"leader_action", sol.leader_action},
                          {"follower_action", sol.follower_action},
                          {"leader_payoff", sol.leader_payoff},
                          {"follower_payoff", sol.follower_payoff}};
  }
  if (nash || all) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& [i, j] : stackeq::EnumeratePureNash(game).points) {
      points.push_back({i, j});
    }
    out["pure_nash"] = points;
  }
  if (minimax || all) {
    const auto [action, value] = stackeq::SolveMinimax(game);
    out["minimax"] = {{"leader_action", action}, {"security_value", value}};
  }
  if (coop || all) {
    out["cooperation_level"] = stackeq::CooperationLevel(game);
  }
  std::cout << out.dump(2) << std::endl;
  return 0;
}

int RunRun(const std::string& experiment, const std::string& algo,
           int num_seeds, const std::string& out_dir,
           const std::string& config_file) {
  stackeq::ExperimentSpec spec;
  spec.experiment = experiment;
  spec.algo = algo;
  for (int i = 1; i <= num_seeds; ++i) spec.seeds.push_back(i);
  spec.out_dir = out_dir;
  if (!config_file.empty()) {
    spec.overrides = stackeq::ParseKeyValueFile(config_file);
  }
  const stackeq::ExperimentResult result = stackeq::RunExperiment(spec);
  std::cout << result.summary.ToCsv();
  return 0;
}

int RunStudy(const std::vector<int>& sizes,
             const std::vector<double>& covariances, int trials,
             const std::string& out_dir, uint64_t seed) {
  std::filesystem::create_directories(out_dir);
  for (int n : sizes) {
    stackeq::StudyConfig cfg;
    cfg.size_n = n;
    cfg.covariances = covariances;
    cfg.trials = trials;
    cfg.seed = seed;
    const stackeq::StudyResult result = stackeq::SeVsNeStudy(cfg);
    const std::string path = out_dir + "/study_n" + std::to_string(n) + ".csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << result.ToCsv();
    std::cout << "wrote " << path << std::endl;
  }
  return 0;
}

int RunVerify() {
  const stackeq::CounterexampleReport report = stackeq::VerifyCounterexample();
  std::cout << report.text;
  return report.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg equilibrium learning in two-player Markov games"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "Analyze a matrix game from JSON");
  std::string game_file;
  bool nash = false, se = false, minimax = false, coop = false;
  solve->add_option("--game", game_file, "Game JSON file with u1/u2 matrices")
      ->required();
  solve->add_flag("--nash", nash, "Enumerate pure Nash points");
  solve->add_flag("--stackelberg", se, "Strong Stackelberg solution");
  solve->add_flag("--minimax", minimax, "Leader maximin action and value");
  solve->add_flag("--coop-level", coop, "Payoff correlation across cells");

  // run
  auto* run = app.add_subcommand("run", "Run a learning experiment");
  std::string experiment, algo, out_dir, config_file;
  int num_seeds = 10;
  run->add_option("--experiment", experiment,
                  "escape|maintain|grid|merge|se_vs_ne|counterexample")
      ->required();
  run->add_option("--algo", algo,
                  "bilevel_q|bilevel_ac|independent_q|value_iteration");
  run->add_option("--seeds", num_seeds, "Number of seeds (run as 1..N)")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--config", config_file, "key = value overrides file");

  // study
  auto* study = app.add_subcommand(
      "study", "Stackelberg-vs-Nash payoff study over random games");
  std::vector<int> sizes = {10};
  std::vector<double> covariances = {-1.0, -0.5, 0.0, 0.5, 0.9, 1.0};
  int trials = 2000;
  std::string study_out;
  uint64_t study_seed = 1;
  study->add_option("--sizes", sizes, "Game sizes n (n x n payoffs)");
  study->add_option("--covariances", covariances, "Payoff covariances")
      ->delimiter(',');
  study->add_option("--trials", trials, "Trials per covariance")
      ->check(CLI::PositiveNumber);
  study->add_option("--out", study_out, "Output directory")->required();
  study->add_option("--seed", study_seed, "Base seed");

  // verify-counterexample
  app.add_subcommand("verify-counterexample",
                     "Check the two-state bi-level Bellman counterexample");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return RunSolve(game_file, nash, se, minimax, coop);
    if (run->parsed())
      return RunRun(experiment, algo, num_seeds, out_dir, config_file);
    if (study->parsed())
      return RunStudy(sizes, covariances, trials, study_out, study_seed);
    return RunVerify();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
