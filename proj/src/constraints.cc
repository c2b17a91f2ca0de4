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

#include "dpsynth/constraints.h"

#include <map>

#include "absl/strings/str_cat.h"

namespace dpsynth {
namespace {

bool HoldsEverywhere(const BinSpec& bin, Comparison cmp, double t) {
  return cmp == Comparison::kLess ? bin.High() < t : bin.Low() > t;
}

bool HoldsSomewhere(const BinSpec& bin, Comparison cmp, double t) {
  return cmp == Comparison::kLess ? bin.Low() < t : bin.High() > t;
}

Atom Less(std::string column, double t) {
  return {std::move(column), Comparison::kLess, t};
}
Atom Greater(std::string column, double t) {
  return {std::move(column), Comparison::kGreater, t};
}

}  // namespace

absl::StatusOr<ConstraintSet> ConstraintSet::Bind(
    const std::vector<Constraint>& constraints, const Domain& domain,
    bool require_aligned) {
  ConstraintSet set;
  for (const Constraint& c : constraints) {
    if (c.atoms.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("constraint '", c.name, "' has no conditions"));
    }
    Bound bound{c.name, {}};
    for (const Atom& a : c.atoms) {
      int col = ColumnIndex(domain, a.column);
      if (col < 0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "constraint '", c.name, "' names unknown column '", a.column, "'"));
      }
      BoundAtom atom{col, {}};
      for (const BinSpec& bin : domain[col].bins) {
        bool all = HoldsEverywhere(bin, a.comparison, a.threshold);
        if (require_aligned && !all &&
            HoldsSomewhere(bin, a.comparison, a.threshold)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "constraint '", c.name, "': bin '", bin.label, "' of '",
              a.column, "' straddles threshold ", a.threshold));
        }
        atom.holds.push_back(all);
      }
      bound.atoms.push_back(std::move(atom));
    }
    set.bound_.push_back(std::move(bound));
  }
  return set;
}

const std::string* ConstraintSet::Violation(const Record& record) const {
  for (const Bound& b : bound_) {
    bool all = true;
    for (const BoundAtom& a : b.atoms) {
      BinIndex v = record[a.column];
      if (v == kMissing || !a.holds[v]) {
        all = false;
        break;
      }
    }
    if (all) return &b.name;
  }
  return nullptr;
}

std::vector<Constraint> DefaultRawConstraints() {
  return {
      {"raw-2-weight-low", {Less("birth_weight", 500)}},
      {"raw-2-weight-high", {Greater("birth_weight", 5500)}},
      {"raw-3-gestation-low", {Less("gestation_week", 22)}},
      {"raw-3-gestation-high", {Greater("gestation_week", 44)}},
      {"raw-4", {Less("mother_age", 23), Greater("parity", 6)}},
      {"raw-5", {Less("mother_age", 20), Greater("parity", 3)}},
      {"raw-6", {Less("gestation_week", 26), Greater("birth_weight", 1499)}},
      {"raw-7", {Less("gestation_week", 29), Greater("birth_weight", 2999)}},
      {"raw-8", {Less("gestation_week", 34), Greater("birth_weight", 3999)}},
      {"raw-9", {Less("birth_weight", 600), Greater("gestation_week", 29)}},
      {"raw-10", {Less("birth_weight", 700), Greater("gestation_week", 32)}},
  };
}

std::vector<Constraint> DefaultSyntheticConstraints() {
  return {
      {"synthetic-1", {Less("mother_age", 23), Greater("parity", 6)}},
      {"synthetic-2", {Less("mother_age", 20), Greater("parity", 3)}},
      {"synthetic-3",
       {Less("gestation_week", 29), Greater("birth_weight", 2999)}},
      {"synthetic-4",
       {Less("gestation_week", 34), Greater("birth_weight", 3999)}},
  };
}

absl::StatusOr<Dataset> FilterByConstraints(const Dataset& data,
                                            const ConstraintSet& constraints,
                                            FilterReport* report) {
  Dataset out(data.shared_domain());
  FilterReport local;
  local.input = data.size();
  std::map<std::string, int64_t> by_rule;
  for (const auto& [record, count] : data.counts()) {
    bool missing = false;
    for (BinIndex v : record) missing |= (v == kMissing);
    if (missing) {
      local.removed += count;
      local.removed_missing += count;
      continue;
    }
    if (const std::string* rule = constraints.Violation(record)) {
      local.removed += count;
      by_rule[*rule] += count;
      continue;
    }
    if (absl::Status s = out.Add(record, count); !s.ok()) return s;
  }
  local.removed_by_rule.assign(by_rule.begin(), by_rule.end());
  if (report != nullptr) *report = std::move(local);
  return out;
}

}  // namespace dpsynth
