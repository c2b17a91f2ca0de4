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

#ifndef DPSYNTH_PIPELINE_H_
#define DPSYNTH_PIPELINE_H_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsynth/budget.h"
#include "dpsynth/config.h"
#include "dpsynth/constraints.h"
#include "dpsynth/criteria.h"
#include "dpsynth/dataset.h"
#include "dpsynth/noise.h"
#include "dpsynth/regression.h"
#include "dpsynth/selection.h"

namespace dpsynth {

// Holds the filtered original data. Every read goes through a named
// accessor and leaves a line in the access log.
class ProtectedDataset {
 public:
  ProtectedDataset(Dataset data, const Schema* schema, std::ostream* log)
      : data_(std::move(data)), schema_(schema), log_(log) {}

  // n after raw filtering, treated as public.
  int64_t size() const { return data_.size(); }
  // Transformed copy feeding a privacy-accounted step.
  absl::StatusOr<Dataset> Transformed(const TransformPlan& plan,
                                      const std::string& purpose) const;

 private:
  void Log(const std::string& what) const;

  Dataset data_;
  const Schema* schema_;
  std::ostream* log_;
};

// Removes records with a missing field or violating a raw constraint.
absl::StatusOr<Dataset> FilterRaw(const Dataset& raw,
                                  const std::vector<Constraint>& constraints,
                                  FilterReport* report);

struct TrialOutput {
  Dataset candidate;
  std::vector<CriterionReport> reports;
  nlohmann::json model;
  bool pass = false;
};

// One iteration: transform, fit (epsilon_x), sample, project, evaluate
// (epsilon_q). `prefit` carries a regression fitted before the loop.
absl::StatusOr<TrialOutput> RunTrial(const ProtectedDataset& original,
                                     const Configuration& configuration,
                                     const PipelineConfig& config,
                                     const FunctionalFit* prefit,
                                     NoiseSource& noise, BudgetLedger& ledger);

struct ReleaseBundle {
  Dataset released;
  std::vector<CriterionReport> reports;
  Configuration configuration;
  nlohmann::json model;
};

struct ReleaseOutcome {
  std::optional<ReleaseBundle> bundle;
  BudgetLedger ledger;
  int64_t n = 0;
  int64_t iterations = 0;
  StopReason reason = StopReason::kIterationBound;
  FilterReport filter;
};

struct RunOptions {
  std::ostream* audit = nullptr;
  std::ostream* access_log = nullptr;
};

// Filters the raw data, then runs the selection-wrapped trial loop. An
// outcome without a bundle means nothing may be released.
absl::StatusOr<ReleaseOutcome> RunRelease(const Dataset& raw,
                                          const PipelineConfig& config,
                                          NoiseSource& noise,
                                          const RunOptions& options = {});

// 2(epsilon_x + epsilon_q), less the regression epsilon when it is charged
// outside the selection.
Epsilon ExpectedTotal(const PipelineConfig& config);

// Public report: n, budgets, configuration and the criteria table.
nlohmann::json MetricsJson(const ReleaseOutcome& outcome,
                           const PipelineConfig& config);

// Human-readable table from a metrics document.
std::string FormatMetricsTable(const nlohmann::json& metrics);

}  // namespace dpsynth

#endif  // DPSYNTH_PIPELINE_H_
