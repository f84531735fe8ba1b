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

#ifndef STACKEQ_COMMON_H_
#define STACKEQ_COMMON_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace stackeq {

// splitmix64; used to derive independent per-run / per-trial generators from
// a base seed so that results do not depend on scheduling order.
inline uint64_t MixSeed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 MakeRng(uint64_t seed, uint64_t stream = 0) {
  return std::mt19937_64(MixSeed(seed, stream));
}

// FNV-1a over a sequence of ints; used to fingerprint greedy policies and
// evaluation rollouts for the convergence verdict.
inline uint64_t HashInts(const std::vector<int>& xs) {
  uint64_t h = 1469598103934665603ULL;
  for (int x : xs) {
    h ^= static_cast<uint64_t>(static_cast<uint32_t>(x));
    h *= 1099511628211ULL;
  }
  return h;
}

struct EpsSchedule {
  double initial = 1.0;
  double final_value = 0.05;
  int decay_steps = 0;  // linear decay over this many steps, then flat

  double At(int step) const {
    if (decay_steps <= 0 || step >= decay_steps) return final_value;
    double frac = static_cast<double>(step) / decay_steps;
    return initial + frac * (final_value - initial);
  }
};

// Per-episode log of one training run.
struct EpisodeLog {
  int episode = 0;
  double ret1 = 0;  // undiscounted behavior return, agent 1
  double ret2 = 0;
  int taken_a1 = -1;  // behavior joint action at the start state
  int taken_a2 = -1;
  int greedy_a1 = -1;  // greedy joint action at the start state
  int greedy_a2 = -1;
  uint64_t policy_hash = 0;  // fingerprint of greedy evaluation behavior
  double tracked_q1 = 0;  // Q-value at the experiment's tracked cell
  double tracked_q2 = 0;
  std::string outcome;  // env-specific greedy outcome label
};

struct RunRecord {
  uint64_t seed = 0;
  std::vector<EpisodeLog> episodes;
  bool converged = false;   // greedy policy unchanged over last 10% episodes
  std::string final_outcome;
  // Merge-style greedy evaluation fractions (zero elsewhere).
  double eval_leader_first = 0;
  double eval_follower_first = 0;
  double eval_crash = 0;

  std::string ToCsv() const;
};

// Verdict rule: the greedy fingerprint is constant over the last 10% of
// episodes (at least one episode).
bool ConvergedOverTail(const std::vector<EpisodeLog>& episodes);

}  // namespace stackeq

#endif  // STACKEQ_COMMON_H_
