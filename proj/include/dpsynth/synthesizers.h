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

#ifndef DPSYNTH_SYNTHESIZERS_H_
#define DPSYNTH_SYNTHESIZERS_H_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsynth/budget.h"
#include "dpsynth/constraints.h"
#include "dpsynth/dataset.h"
#include "dpsynth/noise.h"
#include "json.hpp"

namespace dpsynth {

enum class Family { kIndependent, kPrivBayesTheta, kPrivBayesDegree, kMwem };

std::string FamilyName(Family family);
absl::StatusOr<Family> ParseFamily(const std::string& name);

// Allowed values per hyperparameter name.
using HyperparameterGrid = std::map<std::string, std::vector<double>>;

// Built-in grid of a family; empty for the independent baseline.
const HyperparameterGrid& DefaultGrid(Family family);

struct GeneratorSpec {
  Family family = Family::kIndependent;
  std::map<std::string, double> hyperparameters;
  Epsilon epsilon_x{1};
  // Grid the hyperparameters were drawn from; the built-in grid when null.
  std::shared_ptr<const HyperparameterGrid> declared_grid;

  // e.g. "privbayes_theta(epsilon_split=0.25,theta=8)".
  std::string CanonicalString() const;
};

// Checks that every required hyperparameter is present, with values taken
// from `grid` (the built-in grid when null), and that MWEM specs do not use
// fewer queries than iterations.
absl::Status ValidateGeneratorSpec(const GeneratorSpec& spec,
                                   const HyperparameterGrid* grid = nullptr);

// Cartesian product of `grid`, excluding invalid combinations.
std::vector<GeneratorSpec> ExpandGrid(Family family,
                                      const HyperparameterGrid& grid,
                                      const Epsilon& epsilon_x);

class GenerativeModel {
 public:
  virtual ~GenerativeModel() = default;
  virtual Family family() const = 0;
  virtual const Domain& domain() const = 0;
  virtual Record Sample(RandomStream& rng) const = 0;
  // Structured description for the private directory only.
  virtual nlohmann::json ToJson() const = 0;
};

// A Bayesian network over the columns with one conditional table per node.
// The independent baseline is the network without edges.
class BayesNetModel : public GenerativeModel {
 public:
  struct Node {
    int attribute = 0;
    std::vector<int> parents;
    // Row-major: (parent configuration) * |attribute| + value.
    std::vector<double> table;
  };

  BayesNetModel(Family family, std::shared_ptr<const Domain> domain,
                std::vector<Node> nodes);

  Family family() const override { return family_; }
  const Domain& domain() const override { return *domain_; }
  Record Sample(RandomStream& rng) const override;
  nlohmann::json ToJson() const override;
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  Family family_;
  std::shared_ptr<const Domain> domain_;
  std::vector<Node> nodes_;
};

// A distribution over the full record universe in mixed-radix order.
class DenseModel : public GenerativeModel {
 public:
  DenseModel(Family family, std::shared_ptr<const Domain> domain,
             std::vector<double> probabilities);

  Family family() const override { return family_; }
  const Domain& domain() const override { return *domain_; }
  Record Sample(RandomStream& rng) const override;
  nlohmann::json ToJson() const override;
  const std::vector<double>& probabilities() const { return probabilities_; }

 private:
  Family family_;
  std::shared_ptr<const Domain> domain_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

// Largest universe MWEM will materialize.
inline constexpr int64_t kMaxDenseUniverse = int64_t{1} << 24;

// Fits an epsilon_x-DP model and charges epsilon_x to the ledger once.
absl::StatusOr<std::unique_ptr<GenerativeModel>> Fit(
    const Dataset& transformed, const GeneratorSpec& spec, NoiseSource& noise,
    BudgetLedger& ledger);

// Upper bound on how much the mutual information (in bits) between two
// columns changes when one of n records is replaced.
double MutualInformationSensitivity(int64_t n);
// Mutual information in bits between column `x` and the joint of
// `parents`, computed on the empirical distribution of `data`.
double MutualInformation(const Dataset& data, int x,
                         const std::vector<int>& parents);

struct SamplingOptions {
  // Abort when acceptance, measured over each window of draws, falls below
  // this floor.
  double acceptance_floor = 1e-3;
  int64_t window = 100000;
};

struct SamplingReport {
  int64_t draws = 0;
  int64_t accepted = 0;
};

// Rejection-samples exactly n records satisfying every constraint. Returns
// kAborted when the model is too degenerate to meet the acceptance floor.
absl::StatusOr<Dataset> SampleConstrained(const GenerativeModel& model,
                                          int64_t n,
                                          const ConstraintSet& constraints,
                                          NoiseSource& noise,
                                          const SamplingOptions& options = {},
                                          SamplingReport* report = nullptr);

namespace internal {

absl::StatusOr<std::unique_ptr<GenerativeModel>> FitIndependent(
    const Dataset& data, const GeneratorSpec& spec, NoiseSource& noise);
absl::StatusOr<std::unique_ptr<GenerativeModel>> FitPrivBayes(
    const Dataset& data, const GeneratorSpec& spec, NoiseSource& noise);
absl::StatusOr<std::unique_ptr<GenerativeModel>> FitMwem(
    const Dataset& data, const GeneratorSpec& spec, NoiseSource& noise);

// Candidate parent sets for a PrivBayes node: the maximal subsets of
// `chosen` whose joint domain size is at most `max_cells`, or the empty
// set when none fits.
std::vector<std::vector<int>> MaximalParentSets(const std::vector<int>& chosen,
                                                const Domain& domain,
                                                double max_cells);
// All subsets of `chosen` of size min(degree, |chosen|).
std::vector<std::vector<int>> DegreeParentSets(const std::vector<int>& chosen,
                                               int degree);

}  // namespace internal

}  // namespace dpsynth

#endif  // DPSYNTH_SYNTHESIZERS_H_
