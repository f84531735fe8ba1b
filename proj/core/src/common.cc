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

#include "stackeq/common.h"

#include <algorithm>
#include <sstream>

namespace stackeq {

std::string RunRecord::ToCsv() const {
  std::ostringstream os;
  os.precision(17);
  os << "episode,ep_return_1,ep_return_2,taken_a1,taken_a2,greedy_a1,"
        "greedy_a2,policy_hash,tracked_q1,tracked_q2,outcome\n";
  for (const EpisodeLog& e : episodes) {
    os << e.episode << ',' << e.ret1 << ',' << e.ret2 << ',' << e.taken_a1
       << ',' << e.taken_a2 << ',' << e.greedy_a1 << ',' << e.greedy_a2 << ','
       << e.policy_hash << ',' << e.tracked_q1 << ',' << e.tracked_q2 << ','
       << e.outcome << '\n';
  }
  return os.str();
}

bool ConvergedOverTail(const std::vector<EpisodeLog>& episodes) {
  if (episodes.empty()) return false;
  const size_t tail =
      std::max<size_t>(1, episodes.size() / 10);
  const uint64_t h = episodes.back().policy_hash;
  for (size_t i = episodes.size() - tail; i < episodes.size(); ++i) {
    if (episodes[i].policy_hash != h) return false;
  }
  return true;
}

}  // namespace stackeq
