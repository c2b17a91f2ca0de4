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

#ifndef DPSYNTH_CONSTRAINTS_H_
#define DPSYNTH_CONSTRAINTS_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsynth/dataset.h"

namespace dpsynth {

enum class Comparison { kLess, kGreater };

// column < threshold or column > threshold, both strict.
struct Atom {
  std::string column;
  Comparison comparison = Comparison::kLess;
  double threshold = 0.0;
};

// A record is rejected when every atom holds. An atom holds on a bin only
// if it holds for every value the bin covers.
struct Constraint {
  std::string name;
  std::vector<Atom> atoms;
};

// Constraints resolved to per-bin truth tables over one domain.
class ConstraintSet {
 public:
  // With `require_aligned`, every bin must satisfy each atom for all of its
  // values or for none, so bin-level filtering equals value-level filtering.
  static absl::StatusOr<ConstraintSet> Bind(
      const std::vector<Constraint>& constraints, const Domain& domain,
      bool require_aligned);

  // Name of the first violated constraint, or nullptr.
  const std::string* Violation(const Record& record) const;
  bool Accepts(const Record& record) const {
    return Violation(record) == nullptr;
  }
  size_t size() const { return bound_.size(); }

 private:
  struct BoundAtom {
    int column;
    std::vector<bool> holds;
  };
  struct Bound {
    std::string name;
    std::vector<BoundAtom> atoms;
  };
  std::vector<Bound> bound_;
};

// The ten raw-data rules; rule 1 (missing values) is implicit in
// FilterByConstraints and the OR rules are split into separate entries.
std::vector<Constraint> DefaultRawConstraints();
// The four rules applied to synthetic samples.
std::vector<Constraint> DefaultSyntheticConstraints();

struct FilterReport {
  int64_t input = 0;
  int64_t removed = 0;
  int64_t removed_missing = 0;
  std::vector<std::pair<std::string, int64_t>> removed_by_rule;
  double removed_fraction() const {
    return input == 0 ? 0.0 : static_cast<double>(removed) / input;
  }
};

// Drops records with a missing value or violating any constraint.
absl::StatusOr<Dataset> FilterByConstraints(const Dataset& data,
                                            const ConstraintSet& constraints,
                                            FilterReport* report);

}  // namespace dpsynth

#endif  // DPSYNTH_CONSTRAINTS_H_
