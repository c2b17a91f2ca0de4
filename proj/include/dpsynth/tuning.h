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

#ifndef DPSYNTH_TUNING_H_
#define DPSYNTH_TUNING_H_

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsynth/config.h"
#include "dpsynth/dataset.h"
#include "json.hpp"

namespace dpsynth {

struct TuneOptions {
  int64_t trials_per_config = 20;
  // Keep configurations whose estimated pass rate reaches this floor.
  double floor = 0.10;
  int threads = 1;
  uint64_t seed = 1;
  // Normal quantile of the reported Wilson interval.
  double z = 1.96;
};

struct PassRate {
  int64_t trials = 0;
  int64_t passes = 0;
  int64_t errors = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
};

struct TuneResult {
  Configuration configuration;
  PassRate estimate;
  bool allowed = false;
};

std::pair<double, double> WilsonInterval(int64_t successes, int64_t trials,
                                         double z);

// One trial of configuration `index`; true on pass. Errors count as fails.
using TrialFn =
    std::function<absl::StatusOr<bool>(size_t index, uint64_t seed)>;

// Runs `trials` trials for each of `count` configurations over a pool of
// threads, each trial with its own derived seed.
std::vector<PassRate> EstimatePassRates(size_t count, const TuneOptions& options,
                                        const TrialFn& trial);

// Runs the release trial repeatedly on public data. No budget applies, so
// every trial uses seeded noise and fits its own regression.
absl::StatusOr<std::vector<TuneResult>> TuneOnPublic(
    const Dataset& public_raw, const PipelineConfig& config,
    const TuneOptions& options);

nlohmann::json TuneReportJson(const std::vector<TuneResult>& results,
                              const TuneOptions& options);

}  // namespace dpsynth

#endif  // DPSYNTH_TUNING_H_
