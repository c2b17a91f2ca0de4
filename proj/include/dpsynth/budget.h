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

#ifndef DPSYNTH_BUDGET_H_
#define DPSYNTH_BUDGET_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "boost/rational.hpp"

namespace dpsynth {

// Privacy budgets are exact rationals; floating point appears only when a
// budget calibrates noise.
using Epsilon = boost::rational<int64_t>;

// Parses a decimal literal such as "0.99" or "4" exactly.
absl::StatusOr<Epsilon> ParseEpsilon(std::string_view text);
// Converts a double through its shortest round-trip decimal form.
absl::StatusOr<Epsilon> EpsilonFromDouble(double value);
double ToDouble(const Epsilon& e);
// Decimal text when the value terminates, "p/q" otherwise.
std::string FormatEpsilon(const Epsilon& e);

struct Sensitivity {
  double value = 0.0;
  // Names the bound used, e.g. "max of per-cell counts / n".
  std::string derivation;
};

struct LedgerEntry {
  std::string label;
  Epsilon epsilon;
  Sensitivity sensitivity;
  std::string mechanism;
  // Entries inside the selection loop are multiplied by the selection
  // factor; entries charged once, before the loop, are not.
  bool inside_selection = true;
};

// Append-only record of charging events.
class BudgetLedger {
 public:
  absl::Status Charge(LedgerEntry entry);

  // 1 for a single run, 2 once wrapped in private selection.
  absl::Status set_selection_factor(int factor);
  int selection_factor() const { return selection_factor_; }

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  Epsilon InsideSum() const;
  Epsilon OutsideSum() const;
  // selection_factor * inside + outside.
  Epsilon Total() const;

 private:
  std::vector<LedgerEntry> entries_;
  int selection_factor_ = 1;
};

// Total privacy loss of a finalized ledger.
Epsilon Compose(const BudgetLedger& ledger);

}  // namespace dpsynth

#endif  // DPSYNTH_BUDGET_H_
