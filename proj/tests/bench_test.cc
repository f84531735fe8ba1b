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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stackeq/bench.h"

namespace stackeq {
namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("stackeq_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

TEST_CASE("spec validation rejects unknown names") {
  ExperimentSpec spec;
  spec.experiment = "escape";
  spec.algo = "bilevel_q";
  spec.seeds = {1};
  spec.Validate();  // ok
  spec.experiment = "nope";
  CHECK_THROWS_AS(spec.Validate(), std::invalid_argument);
  spec.experiment = "escape";
  spec.algo = "sarsa";
  CHECK_THROWS_AS(spec.Validate(), std::invalid_argument);
  spec.algo = "bilevel_q";
  spec.seeds.clear();
  CHECK_THROWS_AS(spec.Validate(), std::invalid_argument);
  // The analysis experiments run without a learner.
  spec.seeds = {1};
  spec.algo = "";
  spec.experiment = "counterexample";
  spec.Validate();
  spec.experiment = "se_vs_ne";
  spec.Validate();
  spec.experiment = "escape";
  CHECK_THROWS_AS(spec.Validate(), std::invalid_argument);
}

TEST_CASE("key=value config parsing") {
  std::istringstream in(
      "# a comment\n"
      "alpha1 = 0.5\n"
      "\n"
      "  episodes=12  # trailing comment\n");
  const auto kv = ParseKeyValueConfig(in);
  REQUIRE(kv.size() == 2);
  CHECK(kv.at("alpha1") == "0.5");
  CHECK(kv.at("episodes") == "12");
  std::istringstream bad("no_equals_sign\n");
  CHECK_THROWS_AS(ParseKeyValueConfig(bad), std::invalid_argument);
}

TEST_CASE("overrides apply and reject unknown keys or bad values") {
  TabularConfig tab;
  ApplyOverrides(tab, {{"alpha1", "0.25"}, {"episodes", "42"}});
  CHECK(tab.alpha1 == 0.25);
  CHECK(tab.episodes == 42);
  CHECK_THROWS_AS(ApplyOverrides(tab, {{"bogus", "1"}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ApplyOverrides(tab, {{"episodes", "abc"}}),
                  std::invalid_argument);
  BiACConfig ac;
  ApplyOverrides(ac, {{"reward_scale", "0.1"}, {"hidden", "16"}});
  CHECK(ac.reward_scale == 0.1);
  CHECK(ac.hidden == 16);
  CHECK_THROWS_AS(ApplyOverrides(ac, {{"bogus", "1"}}),
                  std::invalid_argument);
}

TEST_CASE("designated optima per experiment") {
  CHECK(DesignatedOptimum("escape") == "a2-2");
  CHECK(DesignatedOptimum("maintain") == "a0-0");
  CHECK(DesignatedOptimum("grid") == "both_at_20");
  CHECK(DesignatedOptimum("merge") == "leader_first");
  CHECK_THROWS_AS(DesignatedOptimum("nope"), std::invalid_argument);
}

TEST_CASE("curve csv reports zero spread for identical records") {
  RunRecord r;
  r.episodes.resize(3);
  for (int i = 0; i < 3; ++i) r.episodes[i].ret1 = 2.0 * i;
  const std::vector<RunRecord> records{r, r, r};
  const std::string csv =
      CurveCsv(records, [](const EpisodeLog& e) { return e.ret1; });
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "episode,mean,std");
  std::getline(in, line);
  CHECK(line == "0,0,0");
  std::getline(in, line);
  CHECK(line == "1,2,0");
  CHECK_THROWS_AS(EmitPlotData({}, "/tmp"), std::invalid_argument);
}

TEST_CASE("experiment artifacts are byte-identical across reruns") {
  TempDir dir_a, dir_b;
  ExperimentSpec spec;
  spec.experiment = "escape";
  spec.algo = "bilevel_q";
  spec.seeds = {1, 2, 3};
  spec.overrides = {{"episodes", "200"}, {"warmup_steps", "100"}};
  spec.out_dir = dir_a.path.string();
  const ExperimentResult a = RunExperiment(spec);
  spec.out_dir = dir_b.path.string();
  const ExperimentResult b = RunExperiment(spec);
  CHECK(a.summary.ToCsv() == b.summary.ToCsv());
  for (const char* name :
       {"summary.csv", "run_1.csv", "run_2.csv", "run_3.csv",
        "curve_return1.csv", "curve_q1.csv", "joint_action_freq.csv"}) {
    INFO(name);
    REQUIRE(fs::exists(dir_a.path / name));
    CHECK(Slurp(dir_a.path / name) == Slurp(dir_b.path / name));
  }
  CHECK(a.summary.seeds_completed == 3);
  REQUIRE(a.records.size() == 3);
}

TEST_CASE("optimality rate counts converged seeds at the designated optimum") {
  TempDir dir;
  ExperimentSpec spec;
  spec.experiment = "maintain";
  spec.algo = "bilevel_q";
  spec.seeds = {1, 2, 3, 4};
  spec.overrides = {{"episodes", "2000"}, {"warmup_steps", "500"}};
  spec.out_dir = dir.path.string();
  const ExperimentResult r = RunExperiment(spec);
  CHECK(r.summary.optimality_rate == 1.0);
  CHECK(r.summary.converged_rate == 1.0);
  CHECK(r.summary.mean_ret1 == doctest::Approx(20.0));
  CHECK(r.summary.mean_ret2 == doctest::Approx(15.0));
  // The summary row carries its identity.
  CHECK(r.summary.ToCsv().find("maintain,bilevel_q,4") != std::string::npos);
}

TEST_CASE("value iteration runs as a single-seed reference algo") {
  ExperimentSpec spec;
  spec.experiment = "grid";
  spec.algo = "value_iteration";
  spec.seeds = {1};
  const ExperimentResult r = RunExperiment(spec);
  CHECK(r.summary.optimality_rate == 1.0);
}

TEST_CASE("counterexample verification passes its three assertions") {
  const CounterexampleReport report = VerifyCounterexample();
  CHECK(report.passed);
  CHECK(report.bellman_residual <= 1e-9);
  CHECK(report.stage_a1 == 0);
  CHECK(report.stage_a2 == 1);
  CHECK(report.oracle_a1 == 1);
  CHECK(report.oracle_v1 == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(report.oracle_v2 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(report.text.find("FAILED") == std::string::npos);
  // Three PASSED verdict lines.
  size_t count = 0;
  for (size_t pos = report.text.find("PASSED"); pos != std::string::npos;
       pos = report.text.find("PASSED", pos + 1)) {
    ++count;
  }
  CHECK(count == 3);
}

TEST_CASE("study experiment writes the covariance sweep") {
  TempDir dir;
  ExperimentSpec spec;
  spec.experiment = "se_vs_ne";
  spec.seeds = {7};
  spec.overrides = {{"size_n", "4"}, {"trials", "50"}};
  spec.out_dir = dir.path.string();
  RunExperiment(spec);
  const std::string csv = Slurp(dir.path / "study.csv");
  CHECK(csv.find("covariance") != std::string::npos);
  // Default sweep: six covariance rows plus the header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

}  // namespace
}  // namespace stackeq
