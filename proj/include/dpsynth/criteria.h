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

#ifndef DPSYNTH_CRITERIA_H_
#define DPSYNTH_CRITERIA_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "dpsynth/budget.h"
#include "dpsynth/dataset.h"
#include "dpsynth/matching.h"
#include "dpsynth/noise.h"
#include "dpsynth/regression.h"
#include "json.hpp"

namespace dpsynth {

enum class CriterionType {
  kAbsMarginal,
  kRelative1Way,
  kConditionalMean,
  kLrCoefficients,
  kLrMae,
  kFaithfulness,
};

std::string CriterionTypeName(CriterionType type);
absl::StatusOr<CriterionType> ParseCriterionType(const std::string& name);

struct CriterionSpec {
  std::string label;
  CriterionType type = CriterionType::kAbsMarginal;
  double threshold = 0.0;
  Epsilon epsilon{1, 100};
  // Relative criterion: clipping bound and the target tail probability
  // reported with the adjusted threshold.
  double lambda = 2.0;
  double p = 0.05;
  // Averaging column, or the regression target.
  std::string column;
  std::vector<std::string> group_by;
  MatchRules match_rules = DefaultMatchRules();
};

// The eight criteria with their thresholds and budget split.
std::vector<CriterionSpec> DefaultCriteria();

absl::Status ValidateCriteria(const std::vector<CriterionSpec>& criteria,
                              const Epsilon& epsilon_q);

struct CriterionReport {
  std::string label;
  CriterionType type = CriterionType::kAbsMarginal;
  std::string mechanism;
  double noised_value = 0.0;
  double threshold = 0.0;
  Epsilon epsilon{0};
  double delta = 0.0;
  double sigma = 0.0;
  bool pass = false;
  // Public by-products such as s_min or the smallest resize parameter.
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json ToJson() const;
};

// --- Error measures. Their outputs are private until noised.

// (1/n) max over every non-empty column subset and cell of the count gap.
absl::StatusOr<double> AbsMarginalError(const Dataset& r, const Dataset& s);

// 1-way counts of every bin of every column, concatenated.
std::vector<int64_t> OneWayCounts(const Dataset& d);

// Max over 1-way cells of clip(q^(R)/q^(S), 1, l) and its reciprocal, with
// q^ = q + 1.
absl::StatusOr<double> Relative1WayErrorClipped(const Dataset& r,
                                                const Dataset& s,
                                                double lambda);
// The same without clipping.
absl::StatusOr<double> Relative1WayErrorUnclipped(const Dataset& r,
                                                  const Dataset& s);

// max{1/(s_min+1), l - 1/(1/l + 1/(s_min+1))}; needs l > 1 + 1/s_max.
absl::StatusOr<double> ClippedRelativeSensitivity(double lambda, int64_t s_min,
                                                  int64_t s_max);
double UnclippedRelativeSensitivity(int64_t s_max);

// l + eta ln(2p), for 0 < p <= 1/2.
absl::StatusOr<double> AdjustedThreshold(double lambda, double eta, double p);

// Mean of `m` values: all of X when m = n, X padded with w when m > n, and
// the m entries with the smallest `priorities` when m < n.
absl::StatusOr<double> ResizedMean(absl::Span<const double> values, int64_t m,
                                   double w,
                                   absl::Span<const double> priorities);
// As above with the sampled subset drawn from `rng`.
absl::StatusOr<double> ResizedMean(absl::Span<const double> values, int64_t m,
                                   double w, RandomStream& rng);

struct ConditionalMeanResult {
  double error = 0.0;
  double min_resize = 0.0;
  int groups = 0;
};

// Max over b in group_by and the ungrouped mean, and over coarse values v,
// of |resized mean over R's group - mean over S's group|. Resize
// parameters are max{1, count_S - n t_abs}; the ungrouped one is n.
absl::StatusOr<ConditionalMeanResult> ConditionalMeanError(
    const Dataset& r, const Dataset& s, const std::string& column,
    const std::vector<std::string>& group_by, double t_abs,
    RandomStream& rng);

double LrCoefficientError(const std::vector<double>& a,
                          const std::vector<double>& b);

// Faithfulness error 1 - beta_max with S on the left.
absl::StatusOr<double> FaithfulnessError(const Dataset& r, const Dataset& s,
                                         const MatchRules& rules);

// --- Evaluation.

struct EvaluationInputs {
  const Dataset* transformed = nullptr;
  const Dataset* candidate = nullptr;
  // Functional-mechanism fit made before the loop; fitted on `transformed`
  // inside the evaluation when null.
  const FunctionalFit* regression = nullptr;
};

// Evaluates every criterion in order, charging each epsilon. The
// regression coefficient criterion's budget is charged by the fit itself.
absl::StatusOr<std::vector<CriterionReport>> EvaluateCriteria(
    const std::vector<CriterionSpec>& criteria, const EvaluationInputs& inputs,
    NoiseSource& noise, BudgetLedger& ledger);

bool AllPass(const std::vector<CriterionReport>& reports);

}  // namespace dpsynth

#endif  // DPSYNTH_CRITERIA_H_
