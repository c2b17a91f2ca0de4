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

#include "dpsynth/selection.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace dpsynth {

int64_t MinimumIterations(double gamma, double epsilon0) {
  const double bound = std::max(std::log(2.0 / epsilon0) / gamma,
                                1.0 + 1.0 / (std::exp(1.0) * gamma));
  return static_cast<int64_t>(std::ceil(bound));
}

absl::Status ValidateSelectionParams(const SelectionParams& p) {
  if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) {
    return absl::InvalidArgumentError("gamma must lie in [0, 1]");
  }
  if (!(p.epsilon0 >= 0.0 && p.epsilon0 <= 1.0)) {
    return absl::InvalidArgumentError("epsilon0 must lie in [0, 1]");
  }
  if (!std::isfinite(p.tau)) return absl::InvalidArgumentError("tau must be finite");
  if (p.gamma == 0.0) {
    if (p.max_iterations.has_value()) {
      return absl::InvalidArgumentError(
          "gamma = 0 runs until success; leave max_iterations unset and use "
          "the operational cap");
    }
    if (p.operational_cap < 1) {
      return absl::InvalidArgumentError("operational cap must be at least 1");
    }
    return absl::OkStatus();
  }
  if (p.epsilon0 <= 0.0) {
    return absl::InvalidArgumentError("gamma > 0 needs epsilon0 > 0");
  }
  if (!p.max_iterations.has_value()) {
    return absl::InvalidArgumentError("gamma > 0 needs a finite max_iterations");
  }
  const int64_t need = MinimumIterations(p.gamma, p.epsilon0);
  if (*p.max_iterations < need) {
    return absl::InvalidArgumentError(
        absl::StrCat("max_iterations ", *p.max_iterations, " is below ", need,
                     " required by gamma and epsilon0"));
  }
  return absl::OkStatus();
}

std::string StopReasonName(StopReason reason) {
  switch (reason) {
    case StopReason::kAccepted:
      return "accepted";
    case StopReason::kCoin:
      return "coin";
    case StopReason::kIterationBound:
      return "iteration_bound";
    case StopReason::kOperationalCap:
      return "operational_cap";
    case StopReason::kWallClock:
      return "wall_clock";
  }
  return "unknown";
}

}  // namespace dpsynth
