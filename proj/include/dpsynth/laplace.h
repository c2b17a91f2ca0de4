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

#ifndef DPSYNTH_LAPLACE_H_
#define DPSYNTH_LAPLACE_H_

#include <string_view>

#include "absl/status/statusor.h"
#include "dpsynth/budget.h"
#include "dpsynth/noise.h"

namespace dpsynth {

// max{min{x, U}, L}; fails when L > U.
absl::StatusOr<double> Clip(double x, double lower, double upper);
// Unchecked variant for callers that validated the bounds.
inline double ClipUnchecked(double x, double lower, double upper) {
  return x < lower ? lower : (x > upper ? upper : x);
}

struct LaplaceResult {
  double value = 0.0;
  double scale = 0.0;
  // Standard deviation of the added noise, sqrt(2) * scale.
  double sigma = 0.0;
};

// Releases value + Lap(sensitivity / epsilon) and charges the ledger.
absl::StatusOr<LaplaceResult> LaplaceRelease(double value,
                                             const Sensitivity& sensitivity,
                                             const Epsilon& epsilon,
                                             std::string_view label,
                                             NoiseSource& noise,
                                             BudgetLedger& ledger);

}  // namespace dpsynth

#endif  // DPSYNTH_LAPLACE_H_
