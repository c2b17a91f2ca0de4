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

#ifndef DPSYNTH_SELECTION_H_
#define DPSYNTH_SELECTION_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpsynth/noise.h"

namespace dpsynth {

struct SelectionParams {
  double tau = 1.0;
  double gamma = 0.0;
  double epsilon0 = 0.0;
  // Iteration bound T of the algorithm; unbounded when empty.
  std::optional<int64_t> max_iterations;
  // Operational limits, only used when T is unbounded. They stop the run
  // without a release; the privacy guarantee is unaffected.
  int64_t operational_cap = 200;
  double wall_clock_seconds = 0.0;  // zero disables
};

// Checks the ranges and, for gamma > 0, the bound
// T >= max{(1/gamma) ln(2/epsilon0), 1 + 1/(e gamma)}.
absl::Status ValidateSelectionParams(const SelectionParams& params);

// Smallest admissible T for gamma > 0.
int64_t MinimumIterations(double gamma, double epsilon0);

enum class StopReason {
  kAccepted,
  kCoin,            // gamma-biased coin
  kIterationBound,  // T reached
  kOperationalCap,  // unbounded mode, iteration cap
  kWallClock,       // unbounded mode, time cap
};

std::string StopReasonName(StopReason reason);

template <typename Candidate>
struct TrialResult {
  std::optional<Candidate> candidate;
  double score = 0.0;
  // Shown in the audit line, e.g. the configuration id.
  std::string id;
};

template <typename Candidate>
struct SelectionResult {
  std::optional<Candidate> output;
  double score = 0.0;
  int64_t iterations = 0;
  StopReason reason = StopReason::kIterationBound;
};

// Runs trials until one scores at least tau, stopping after each failure
// with probability gamma. A trial that returns an error counts as a score
// below tau. One audit line per iteration goes to `audit` when given.
template <typename Candidate>
SelectionResult<Candidate> Select(
    const std::function<absl::StatusOr<TrialResult<Candidate>>(int64_t)>& trial,
    const SelectionParams& params, NoiseSource& noise,
    std::ostream* audit = nullptr) {
  SelectionResult<Candidate> result;
  const auto start = std::chrono::steady_clock::now();
  const bool bounded = params.max_iterations.has_value();
  for (int64_t j = 1;; ++j) {
    if (bounded && j > *params.max_iterations) {
      result.reason = StopReason::kIterationBound;
      return result;
    }
    if (!bounded && j > params.operational_cap) {
      result.reason = StopReason::kOperationalCap;
      return result;
    }
    const auto t0 = std::chrono::steady_clock::now();
    absl::StatusOr<TrialResult<Candidate>> out = trial(j);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    result.iterations = j;
    const bool accepted =
        out.ok() && out->candidate.has_value() && out->score >= params.tau;
    if (audit != nullptr) {
      *audit << "iteration=" << j << " config=" << (out.ok() ? out->id : "-")
             << " pass=" << (accepted ? "true" : "false")
             << " seconds=" << seconds;
      if (!out.ok()) *audit << " error=\"" << out.status().message() << "\"";
      *audit << "\n";
      audit->flush();
    }
    if (accepted) {
      result.output = std::move(out->candidate);
      result.score = out->score;
      result.reason = StopReason::kAccepted;
      return result;
    }
    if (params.gamma > 0.0 && noise.Bernoulli(params.gamma, "selection/coin")) {
      result.reason = StopReason::kCoin;
      return result;
    }
    if (!bounded && params.wall_clock_seconds > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count() > params.wall_clock_seconds) {
      result.reason = StopReason::kWallClock;
      return result;
    }
  }
}

}  // namespace dpsynth

#endif  // DPSYNTH_SELECTION_H_
