//
// Copyright 2026 The dpsynth Authors
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
//

#ifndef DPSYNTH_MATCHING_H_
#define DPSYNTH_MATCHING_H_

#include <map>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsynth/dataset.h"

namespace dpsynth {

// Which records count as similar. Columns listed as tolerant may differ by
// one adjacent bin, in at most one such column; every other column must be
// equal. A bin that contains one of `exact_if_strictly_inside[column]`
// away from its edges never takes part in a one-bin difference.
struct MatchRules {
  std::vector<std::string> tolerant_columns;
  std::map<std::string, std::vector<double>> exact_if_strictly_inside;
};

// Exact on birth_month, parity, birth_sex; tolerant on mother_age,
// gestation_week, birth_weight; mother_age bins around 37 are exact.
MatchRules DefaultMatchRules();

class MatchPredicate {
 public:
  static absl::StatusOr<MatchPredicate> Bind(const MatchRules& rules,
                                             const Domain& domain);

  // True when cost(a, b) <= 1.
  bool Matches(const Record& a, const Record& b) const;
  // Every record b with Matches(a, b): a itself plus one-bin moves.
  std::vector<Record> Neighbors(const Record& a) const;

 private:
  std::vector<bool> tolerant_;
  // frozen_[c][bin]: the bin cannot differ by one.
  std::vector<std::vector<bool>> frozen_;
  std::vector<int> widths_;
};

// Bipartite graph between distinct left and right values, each with a
// multiplicity; equivalent to the graph on expanded copies.
struct MatchGraph {
  std::vector<int64_t> left_capacity;
  std::vector<int64_t> right_capacity;
  std::vector<std::vector<int>> adjacency;  // left -> right indices

  int64_t left_total() const;
  int64_t right_total() const;
};

// Left side: released records; right side: transformed records.
absl::StatusOr<MatchGraph> BuildMatchGraph(const Dataset& released,
                                           const Dataset& transformed,
                                           const MatchPredicate& predicate);

// Size of a maximum-cardinality matching, by max-flow.
int64_t MaxMatching(const MatchGraph& graph);
// Matching size over the number of left copies; zero for an empty graph.
double BetaMax(const MatchGraph& graph);

}  // namespace dpsynth

#endif  // DPSYNTH_MATCHING_H_
