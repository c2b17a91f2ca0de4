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

#include "dpsynth/laplace.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace dpsynth {

absl::StatusOr<double> Clip(double x, double lower, double upper) {
  if (lower > upper) {
    return absl::InvalidArgumentError(
        absl::StrCat("clip bounds [", lower, ", ", upper, "] are inverted"));
  }
  return ClipUnchecked(x, lower, upper);
}

absl::StatusOr<LaplaceResult> LaplaceRelease(double value,
                                             const Sensitivity& sensitivity,
                                             const Epsilon& epsilon,
                                             std::string_view label,
                                             NoiseSource& noise,
                                             BudgetLedger& ledger) {
  if (!std::isfinite(value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", std::string(label), "': value to release is not finite"));
  }
  if (epsilon <= 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", std::string(label), "': epsilon must be positive"));
  }
  if (!(sensitivity.value > 0) || !std::isfinite(sensitivity.value)) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", std::string(label), "': sensitivity must be positive"));
  }
  double scale = sensitivity.value / ToDouble(epsilon);
  double draw = noise.Laplace(scale, label);
  if (absl::Status s = ledger.Charge(
          {std::string(label), epsilon, sensitivity, "laplace", true});
      !s.ok()) {
    return s;
  }
  return LaplaceResult{value + draw, scale, std::sqrt(2.0) * scale};
}

}  // namespace dpsynth
