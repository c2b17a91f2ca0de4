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

#ifndef DPSYNTH_CONFIG_H_
#define DPSYNTH_CONFIG_H_

#include <map>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsynth/budget.h"
#include "dpsynth/constraints.h"
#include "dpsynth/criteria.h"
#include "dpsynth/dataset.h"
#include "dpsynth/projection.h"
#include "dpsynth/selection.h"
#include "dpsynth/synthesizers.h"
#include "json.hpp"

namespace dpsynth {

struct GeneratorGrid {
  Family family = Family::kIndependent;
  HyperparameterGrid grid;
};

struct ConfigurationSpace {
  // Alternatives per column; a column left out keeps its raw bins.
  std::map<std::string, std::vector<std::string>> transformations;
  std::vector<GeneratorGrid> generators;
  std::vector<int64_t> min_counts;
};

// One point of the space.
struct Configuration {
  TransformPlan plan;
  GeneratorSpec generator;
  int64_t min_count = 1;
  std::string canonical;
  std::string id;
};

// Canonical text and its short hash, "cfg-" + 16 hex digits.
std::string CanonicalConfiguration(const Schema& schema,
                                   const TransformPlan& plan,
                                   const GeneratorSpec& generator,
                                   int64_t min_count);
std::string ConfigurationId(const std::string& canonical);

// Cartesian product, skipping invalid hyperparameter combinations.
absl::StatusOr<std::vector<Configuration>> EnumerateConfigurations(
    const Schema& schema, const ConfigurationSpace& space,
    const Epsilon& epsilon_x);

enum class RegressionPlacement { kPreLoop, kInLoop };

struct RegressionOptions {
  RegressionPlacement placement = RegressionPlacement::kPreLoop;
  // Count the pre-loop fit once rather than under the selection factor.
  bool charge_outside_selection = false;
};

struct PipelineConfig {
  Schema schema;
  Epsilon epsilon_x{4};
  Epsilon epsilon_q{99, 100};
  std::vector<CriterionSpec> criteria;
  ConfigurationSpace space;
  // Configuration ids kept after tuning; empty keeps the whole space.
  std::vector<std::string> allow_list;
  SelectionParams selection;
  ProjectionAlgorithm projection = ProjectionAlgorithm::kPrimary;
  RegressionOptions regression;
  SamplingOptions sampling;
  std::vector<Constraint> raw_constraints;
  std::vector<Constraint> synthetic_constraints;
  // The document as parsed, archived next to a release.
  nlohmann::json source;
};

// `base_dir` resolves a relative schema path.
absl::StatusOr<PipelineConfig> ParsePipelineConfig(const std::string& text,
                                                   const std::string& base_dir);
absl::StatusOr<PipelineConfig> LoadPipelineConfig(const std::string& path);

// Schema, budgets, criteria, selection parameters, constraints and the
// configuration list, all checked before any data is read.
absl::Status ValidatePipelineConfig(const PipelineConfig& config);

// The configurations a release samples from: the space, narrowed to the
// allow-list when one is given.
absl::StatusOr<std::vector<Configuration>> CandidateConfigurations(
    const PipelineConfig& config);

}  // namespace dpsynth

#endif  // DPSYNTH_CONFIG_H_
