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

#include "dpsynth/pipeline.h"

#include <cstdio>
#include <iomanip>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "dpsynth/projection.h"
#include "dpsynth/synthesizers.h"

namespace dpsynth {
namespace {

const CriterionSpec* RegressionCriterion(const PipelineConfig& config) {
  for (const CriterionSpec& c : config.criteria) {
    if (c.type == CriterionType::kLrCoefficients) return &c;
  }
  return nullptr;
}

bool FitsBeforeLoop(const PipelineConfig& config) {
  return config.regression.placement == RegressionPlacement::kPreLoop &&
         RegressionCriterion(config) != nullptr;
}

// The trial ledger must hold exactly epsilon_x plus the criteria charged
// inside the loop.
Epsilon TrialBudget(const PipelineConfig& config) {
  Epsilon e = config.epsilon_x + config.epsilon_q;
  if (FitsBeforeLoop(config)) e -= RegressionCriterion(config)->epsilon;
  return e;
}

std::string Fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

absl::StatusOr<Dataset> ProtectedDataset::Transformed(
    const TransformPlan& plan, const std::string& purpose) const {
  Log(absl::StrCat("transform purpose=", purpose));
  return ApplyTransform(data_, *schema_, plan);
}

void ProtectedDataset::Log(const std::string& what) const {
  if (log_ != nullptr) {
    *log_ << what << "\n";
    log_->flush();
  }
}

absl::StatusOr<Dataset> FilterRaw(const Dataset& raw,
                                  const std::vector<Constraint>& constraints,
                                  FilterReport* report) {
  absl::StatusOr<ConstraintSet> set =
      ConstraintSet::Bind(constraints, raw.domain(), true);
  if (!set.ok()) return set.status();
  return FilterByConstraints(raw, *set, report);
}

absl::StatusOr<TrialOutput> RunTrial(const ProtectedDataset& original,
                                     const Configuration& configuration,
                                     const PipelineConfig& config,
                                     const FunctionalFit* prefit,
                                     NoiseSource& noise, BudgetLedger& ledger) {
  absl::StatusOr<Dataset> transformed =
      original.Transformed(configuration.plan, "trial");
  if (!transformed.ok()) return transformed.status();
  const Dataset& r = *transformed;

  absl::StatusOr<std::unique_ptr<GenerativeModel>> model =
      Fit(r, configuration.generator, noise, ledger);
  if (!model.ok()) return model.status();

  absl::StatusOr<ConstraintSet> synthetic =
      ConstraintSet::Bind(config.synthetic_constraints, r.domain(), false);
  if (!synthetic.ok()) return synthetic.status();
  absl::StatusOr<Dataset> sample = SampleConstrained(
      **model, r.size(), *synthetic, noise, config.sampling);
  if (!sample.ok()) return sample.status();

  absl::StatusOr<Dataset> candidate =
      Project(*sample, configuration.min_count, config.projection, noise);
  if (!candidate.ok()) return candidate.status();

  const FunctionalFit* fit = FitsBeforeLoop(config) ? prefit : nullptr;
  if (FitsBeforeLoop(config) && fit == nullptr) {
    return absl::FailedPreconditionError("pre-loop regression fit is missing");
  }
  absl::StatusOr<std::vector<CriterionReport>> reports = EvaluateCriteria(
      config.criteria, {&r, &*candidate, fit}, noise, ledger);
  if (!reports.ok()) return reports.status();

  const Epsilon spent = ledger.InsideSum() + ledger.OutsideSum();
  if (spent != TrialBudget(config)) {
    return absl::InternalError(
        absl::StrCat("trial spent ", FormatEpsilon(spent), " instead of ",
                     FormatEpsilon(TrialBudget(config))));
  }
  TrialOutput out;
  out.candidate = *std::move(candidate);
  out.reports = *std::move(reports);
  out.model = (*model)->ToJson();
  out.pass = AllPass(out.reports);
  return out;
}

Epsilon ExpectedTotal(const PipelineConfig& config) {
  Epsilon total = Epsilon(2) * (config.epsilon_x + config.epsilon_q);
  if (FitsBeforeLoop(config) && config.regression.charge_outside_selection) {
    total -= RegressionCriterion(config)->epsilon;
  }
  return total;
}

absl::StatusOr<ReleaseOutcome> RunRelease(const Dataset& raw,
                                          const PipelineConfig& config,
                                          NoiseSource& noise,
                                          const RunOptions& options) {
  if (absl::Status s = ValidatePipelineConfig(config); !s.ok()) return s;
  absl::StatusOr<std::vector<Configuration>> candidates =
      CandidateConfigurations(config);
  if (!candidates.ok()) return candidates.status();
  if (candidates->empty()) {
    return absl::InvalidArgumentError("config: no configurations to sample");
  }

  ReleaseOutcome outcome;
  absl::StatusOr<Dataset> filtered =
      FilterRaw(raw, config.raw_constraints, &outcome.filter);
  if (!filtered.ok()) return filtered.status();
  if (filtered->empty()) {
    return absl::FailedPreconditionError("raw filtering removed every record");
  }
  outcome.n = filtered->size();
  std::ostream* audit = options.audit;
  if (audit != nullptr) {
    *audit << "filter input=" << outcome.filter.input
           << " removed=" << outcome.filter.removed
           << " missing=" << outcome.filter.removed_missing << "\n";
    for (const auto& [rule, count] : outcome.filter.removed_by_rule) {
      *audit << "filter rule=" << rule << " removed=" << count << "\n";
    }
    *audit << "n=" << outcome.n << " configurations=" << candidates->size()
           << "\n";
  }
  ProtectedDataset original(*std::move(filtered), &config.schema,
                            options.access_log);

  std::optional<FunctionalFit> prefit;
  if (FitsBeforeLoop(config)) {
    const CriterionSpec* spec = RegressionCriterion(config);
    absl::StatusOr<Dataset> base = original.Transformed(
        TransformPlan::Identity(config.schema), "pre-loop regression");
    if (!base.ok()) return base.status();
    absl::StatusOr<FunctionalFit> fit = FitFunctionalMechanism(
        *base, spec->column, spec->epsilon, spec->label,
        !config.regression.charge_outside_selection, noise, outcome.ledger);
    if (!fit.ok()) return fit.status();
    prefit = *std::move(fit);
  }

  // Candidates carry the index of their configuration.
  std::function<absl::StatusOr<TrialResult<std::pair<TrialOutput, size_t>>>(
      int64_t)>
      indexed = [&](int64_t)
      -> absl::StatusOr<TrialResult<std::pair<TrialOutput, size_t>>> {
    const uint64_t pick =
        noise.UniformInt(candidates->size(), "selection/configuration");
    const Configuration& cfg = (*candidates)[pick];
    BudgetLedger trial_ledger;
    absl::StatusOr<TrialOutput> out =
        RunTrial(original, cfg, config, prefit ? &*prefit : nullptr, noise,
                 trial_ledger);
    if (!out.ok()) {
      return absl::Status(out.status().code(),
                          absl::StrCat(cfg.id, ": ", out.status().message()));
    }
    TrialResult<std::pair<TrialOutput, size_t>> result;
    result.id = cfg.id;
    result.score = out->pass ? 1.0 : 0.0;
    if (out->pass) result.candidate = std::make_pair(*std::move(out), pick);
    return result;
  };

  SelectionResult<std::pair<TrialOutput, size_t>> selected =
      Select(indexed, config.selection, noise, audit);
  if (absl::Status s = noise.status(); !s.ok()) return s;
  outcome.iterations = selected.iterations;
  outcome.reason = selected.reason;

  if (absl::Status s = outcome.ledger.Charge(
          {"model_fit", config.epsilon_x,
           {0.0, "per generator family"}, "generator", true});
      !s.ok()) {
    return s;
  }
  if (absl::Status s = outcome.ledger.Charge(
          {"acceptance_criteria",
           TrialBudget(config) - config.epsilon_x,
           {0.0, "per criterion"},
           "laplace",
           true});
      !s.ok()) {
    return s;
  }
  if (absl::Status s = outcome.ledger.set_selection_factor(2); !s.ok()) return s;
  if (outcome.ledger.Total() != ExpectedTotal(config)) {
    return absl::InternalError(absl::StrCat(
        "ledger total ", FormatEpsilon(outcome.ledger.Total()),
        " differs from ", FormatEpsilon(ExpectedTotal(config))));
  }
  if (audit != nullptr) {
    *audit << "stop=" << StopReasonName(selected.reason)
           << " iterations=" << selected.iterations
           << " epsilon_total=" << FormatEpsilon(outcome.ledger.Total()) << "\n";
    audit->flush();
  }
  if (!selected.output.has_value()) return outcome;

  auto& [trial_out, index] = *selected.output;
  ReleaseBundle bundle;
  bundle.configuration = (*candidates)[index];
  bundle.released = std::move(trial_out.candidate);
  bundle.reports = std::move(trial_out.reports);
  bundle.model = std::move(trial_out.model);
  if (bundle.released.size() != outcome.n ||
      bundle.released.MinCount() < bundle.configuration.min_count ||
      !AllPass(bundle.reports)) {
    return absl::InternalError("accepted candidate breaks a release invariant");
  }
  outcome.bundle = std::move(bundle);
  return outcome;
}

nlohmann::json MetricsJson(const ReleaseOutcome& outcome,
                           const PipelineConfig& config) {
  nlohmann::json ledger = nlohmann::json::array();
  for (const LedgerEntry& e : outcome.ledger.entries()) {
    ledger.push_back({{"label", e.label},
                      {"epsilon", FormatEpsilon(e.epsilon)},
                      {"mechanism", e.mechanism},
                      {"inside_selection", e.inside_selection}});
  }
  nlohmann::json doc = {
      {"released", outcome.bundle.has_value()},
      {"n", outcome.n},
      {"budget",
       {{"epsilon_x", FormatEpsilon(config.epsilon_x)},
        {"epsilon_q", FormatEpsilon(config.epsilon_q)},
        {"selection_factor", outcome.ledger.selection_factor()},
        {"epsilon_total", FormatEpsilon(outcome.ledger.Total())},
        {"ledger", ledger}}},
  };
  if (outcome.bundle.has_value()) {
    const ReleaseBundle& b = *outcome.bundle;
    doc["configuration"] = {{"id", b.configuration.id},
                            {"canonical", b.configuration.canonical}};
    nlohmann::json criteria = nlohmann::json::array();
    for (const CriterionReport& r : b.reports) criteria.push_back(r.ToJson());
    doc["criteria"] = criteria;
  }
  return doc;
}

std::string FormatMetricsTable(const nlohmann::json& metrics) {
  std::ostringstream os;
  os << "n = " << metrics.value("n", int64_t{0}) << ", total epsilon = "
     << metrics["budget"].value("epsilon_total", std::string("?")) << "\n";
  if (!metrics.value("released", false)) {
    os << "no release\n";
    return os.str();
  }
  os << "configuration " << metrics["configuration"].value("id", std::string())
     << ": " << metrics["configuration"].value("canonical", std::string())
     << "\n";
  os << std::left << std::setw(22) << "criterion" << std::setw(12) << "result"
     << std::setw(11) << "threshold" << std::setw(8) << "epsilon"
     << std::setw(12) << "mechanism" << std::setw(16) << "[L,U]"
     << std::setw(10) << "delta" << std::setw(10) << "sigma"
     << "pass\n";
  for (const nlohmann::json& c : metrics["criteria"]) {
    std::string range;
    if (c["details"].contains("range")) {
      range = absl::StrCat("[", c["details"]["range"][0].get<double>(), ", ",
                           c["details"]["range"][1].get<double>(), "]");
    }
    os << std::left << std::setw(22) << c.value("label", std::string())
       << std::setw(12) << Fixed(c.value("result", 0.0), 4) << std::setw(11)
       << c.value("threshold", 0.0) << std::setw(8)
       << c.value("epsilon", std::string()) << std::setw(12)
       << c.value("mechanism", std::string()) << std::setw(16) << range
       << std::setw(10) << Fixed(c.value("delta", 0.0), 3) << std::setw(10)
       << Fixed(c.value("sigma", 0.0), 3)
       << (c.value("pass", false) ? "yes" : "no") << "\n";
  }
  return os.str();
}

}  // namespace dpsynth
