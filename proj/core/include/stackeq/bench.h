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

#ifndef STACKEQ_BENCH_H_
#define STACKEQ_BENCH_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stackeq/biac.h"
#include "stackeq/common.h"
#include "stackeq/markov_game.h"
#include "stackeq/tabular.h"

namespace stackeq {

// One experiment run request: which environment, which learner, which seeds,
// plus key=value hyperparameter overrides and an output directory for
// artifacts (empty: nothing written).
struct ExperimentSpec {
  std::string experiment;  // escape|maintain|grid|merge|se_vs_ne|counterexample
  std::string algo;  // bilevel_q|bilevel_ac|independent_q|value_iteration
  std::vector<uint64_t> seeds;
  std::map<std::string, std::string> overrides;
  std::string out_dir;
  void Validate() const;  // throws on unknown names or empty seeds
};

struct SummaryTable {
  std::string experiment;
  std::string algo;
  int seeds_completed = 0;
  double mean_ret1 = 0;  // final greedy returns, averaged over seeds
  double mean_ret2 = 0;
  // Fraction of seeds whose final greedy outcome is the experiment's
  // designated optimum and whose greedy policy was stable over the tail.
  double optimality_rate = 0;
  double converged_rate = 0;
  double leader_first = 0;  // merge greedy-evaluation fractions
  double follower_first = 0;
  double crash = 0;
  std::string ToCsv() const;
  nlohmann::json ToJson() const;
};

// Outcome label counted as optimal per experiment (e.g. "a2-2" is the C-Z
// cell of the 3x3 coordination games).
std::string DesignatedOptimum(const std::string& experiment);

MarkovGameModel ModelForExperiment(const std::string& experiment);

// Hyperparameter defaults per experiment, before overrides.
TabularConfig TabularDefaults(const std::string& experiment);
BiACConfig BiacDefaults(const std::string& experiment);
void ApplyOverrides(TabularConfig& config,
                    const std::map<std::string, std::string>& overrides);
void ApplyOverrides(BiACConfig& config,
                    const std::map<std::string, std::string>& overrides);

// Lines of `key = value`; '#' starts a comment, blank lines ignored.
std::map<std::string, std::string> ParseKeyValueConfig(std::istream& in);
std::map<std::string, std::string> ParseKeyValueFile(const std::string& path);

struct ExperimentResult {
  SummaryTable summary;
  std::vector<RunRecord> records;
};

// Runs the spec's seeds in a worker pool (each worker owns its learner and
// generator), writes per-run CSVs, summary.csv / summary.json and the
// learning-curve files into spec.out_dir, and returns the summary.
ExperimentResult RunExperiment(const ExperimentSpec& spec);

// Mean +/- std learning curves per episode across seeds ("episode,mean,std")
// for returns and tracked Q values, plus the joint-action frequency over the
// trailing 100 behavior steps when the env is a stage game. Throws on an
// empty record set.
void EmitPlotData(const std::vector<RunRecord>& records,
                  const std::string& out_dir, int num_actions1 = 0,
                  int num_actions2 = 0);
// One curve as a CSV string; selector picks the plotted field.
std::string CurveCsv(const std::vector<RunRecord>& records,
                     const std::function<double(const EpisodeLog&)>& field);

struct CounterexampleReport {
  bool passed = false;
  double bellman_residual = 0;  // sup-norm of T Q* - Q*
  int stage_a1 = -1;            // stage Stackelberg pair at s1
  int stage_a2 = -1;
  int oracle_a1 = -1;  // brute-force leader action at s1
  double oracle_v1 = 0;
  double oracle_v2 = 0;
  std::string text;  // one line per assertion, PASSED/FAILED
};

// Checks that the committed two-state game admits a bi-level Bellman fixed
// point whose stage solution at s1 is (A, B) while the brute-force bi-level
// optimum plays B for payoff (10, 0): a fixed point of the bi-level Bellman
// equation need not solve the bi-level problem.
CounterexampleReport VerifyCounterexample();

}  // namespace stackeq

#endif  // STACKEQ_BENCH_H_
