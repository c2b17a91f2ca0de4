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

#include "dpsynth/synthesizers.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace dpsynth {
namespace {

std::string FormatNumber(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::vector<std::string> RequiredHyperparameters(Family family) {
  switch (family) {
    case Family::kIndependent:
      return {};
    case Family::kPrivBayesTheta:
      return {"epsilon_split", "theta"};
    case Family::kPrivBayesDegree:
      return {"epsilon_split", "degree"};
    case Family::kMwem:
      return {"num_query", "num_iterations", "num_inner_updates"};
  }
  return {};
}

}  // namespace

std::string FamilyName(Family family) {
  switch (family) {
    case Family::kIndependent:
      return "independent";
    case Family::kPrivBayesTheta:
      return "privbayes_theta";
    case Family::kPrivBayesDegree:
      return "privbayes_degree";
    case Family::kMwem:
      return "mwem";
  }
  return "unknown";
}

absl::StatusOr<Family> ParseFamily(const std::string& name) {
  for (Family f : {Family::kIndependent, Family::kPrivBayesTheta,
                   Family::kPrivBayesDegree, Family::kMwem}) {
    if (FamilyName(f) == name) return f;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown generator family '", name, "'"));
}

const HyperparameterGrid& DefaultGrid(Family family) {
  static const auto* grids = new std::map<Family, HyperparameterGrid>{
      {Family::kIndependent, {}},
      {Family::kPrivBayesTheta,
       {{"epsilon_split", {0.1, 0.25, 0.5, 0.7}},
        {"theta", {2, 4, 8, 16, 20, 25, 30, 35, 40, 50, 60, 100}}}},
      {Family::kPrivBayesDegree,
       {{"epsilon_split", {0.1, 0.25, 0.5, 0.7}}, {"degree", {2, 3, 4}}}},
      {Family::kMwem,
       {{"num_query", {128, 512, 1024, 4096}},
        {"num_iterations", {100, 500, 1000}},
        {"num_inner_updates", {25, 100}}}},
  };
  return grids->at(family);
}

std::string GeneratorSpec::CanonicalString() const {
  std::vector<std::string> parts;
  for (const auto& [k, v] : hyperparameters) {
    parts.push_back(absl::StrCat(k, "=", FormatNumber(v)));
  }
  return absl::StrCat(FamilyName(family), "(", absl::StrJoin(parts, ","), ")");
}

absl::Status ValidateGeneratorSpec(const GeneratorSpec& spec,
                                   const HyperparameterGrid* grid) {
  if (spec.epsilon_x <= 0) {
    return absl::InvalidArgumentError("epsilon_x must be positive");
  }
  if (grid == nullptr) {
    grid = spec.declared_grid ? spec.declared_grid.get()
                              : &DefaultGrid(spec.family);
  }
  std::vector<std::string> required = RequiredHyperparameters(spec.family);
  for (const std::string& name : required) {
    auto it = spec.hyperparameters.find(name);
    if (it == spec.hyperparameters.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          FamilyName(spec.family), " requires hyperparameter '", name, "'"));
    }
    auto g = grid->find(name);
    if (g == grid->end() ||
        std::find(g->second.begin(), g->second.end(), it->second) ==
            g->second.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("hyperparameter ", name, "=", FormatNumber(it->second),
                       " is off the declared grid"));
    }
  }
  for (const auto& [name, value] : spec.hyperparameters) {
    if (std::find(required.begin(), required.end(), name) == required.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown hyperparameter '", name, "' for ", FamilyName(spec.family)));
    }
  }
  const auto& h = spec.hyperparameters;
  switch (spec.family) {
    case Family::kPrivBayesTheta:
    case Family::kPrivBayesDegree: {
      double split = h.at("epsilon_split");
      if (!(split > 0 && split < 1)) {
        return absl::InvalidArgumentError("epsilon_split must be in (0, 1)");
      }
      if (spec.family == Family::kPrivBayesTheta && !(h.at("theta") > 0)) {
        return absl::InvalidArgumentError("theta must be positive");
      }
      if (spec.family == Family::kPrivBayesDegree &&
          (h.at("degree") < 1 || std::floor(h.at("degree")) != h.at("degree"))) {
        return absl::InvalidArgumentError("degree must be a positive integer");
      }
      break;
    }
    case Family::kMwem:
      if (h.at("num_query") < h.at("num_iterations")) {
        return absl::InvalidArgumentError(
            "num_query < num_iterations is excluded");
      }
      for (const char* k : {"num_query", "num_iterations", "num_inner_updates"}) {
        if (h.at(k) < 1 || std::floor(h.at(k)) != h.at(k)) {
          return absl::InvalidArgumentError(
              absl::StrCat(k, " must be a positive integer"));
        }
      }
      break;
    case Family::kIndependent:
      break;
  }
  return absl::OkStatus();
}

std::vector<GeneratorSpec> ExpandGrid(Family family,
                                      const HyperparameterGrid& grid,
                                      const Epsilon& epsilon_x) {
  std::vector<GeneratorSpec> out;
  std::vector<std::string> names = RequiredHyperparameters(family);
  std::vector<size_t> idx(names.size(), 0);
  auto shared = std::make_shared<const HyperparameterGrid>(grid);
  for (const std::string& n : names) {
    auto it = grid.find(n);
    if (it == grid.end() || it->second.empty()) return out;
  }
  while (true) {
    GeneratorSpec spec;
    spec.family = family;
    spec.epsilon_x = epsilon_x;
    spec.declared_grid = shared;
    for (size_t i = 0; i < names.size(); ++i) {
      spec.hyperparameters[names[i]] = grid.at(names[i])[idx[i]];
    }
    if (ValidateGeneratorSpec(spec, &grid).ok()) out.push_back(spec);
    size_t i = 0;
    for (; i < names.size(); ++i) {
      if (++idx[i] < grid.at(names[i]).size()) break;
      idx[i] = 0;
    }
    if (i == names.size()) break;
  }
  return out;
}

BayesNetModel::BayesNetModel(Family family,
                             std::shared_ptr<const Domain> domain,
                             std::vector<Node> nodes)
    : family_(family), domain_(std::move(domain)), nodes_(std::move(nodes)) {}

Record BayesNetModel::Sample(RandomStream& rng) const {
  Record r(domain_->size(), 0);
  for (const Node& node : nodes_) {
    int64_t row = 0;
    for (int p : node.parents) {
      row = row * static_cast<int64_t>((*domain_)[p].bins.size()) + r[p];
    }
    size_t width = (*domain_)[node.attribute].bins.size();
    absl::Span<const double> probs(node.table.data() + row * width, width);
    r[node.attribute] = static_cast<BinIndex>(rng.Categorical(probs));
  }
  return r;
}

nlohmann::json BayesNetModel::ToJson() const {
  nlohmann::json j;
  j["family"] = FamilyName(family_);
  for (const Node& node : nodes_) {
    nlohmann::json n;
    n["attribute"] = (*domain_)[node.attribute].name;
    std::vector<std::string> parents;
    for (int p : node.parents) parents.push_back((*domain_)[p].name);
    n["parents"] = parents;
    n["table"] = node.table;
    j["nodes"].push_back(n);
  }
  return j;
}

DenseModel::DenseModel(Family family, std::shared_ptr<const Domain> domain,
                       std::vector<double> probabilities)
    : family_(family),
      domain_(std::move(domain)),
      probabilities_(std::move(probabilities)) {
  cumulative_.resize(probabilities_.size());
  std::partial_sum(probabilities_.begin(), probabilities_.end(),
                   cumulative_.begin());
}

Record DenseModel::Sample(RandomStream& rng) const {
  double target = rng.Uniform() * cumulative_.back();
  size_t cell = std::upper_bound(cumulative_.begin(), cumulative_.end(), target) -
                cumulative_.begin();
  cell = std::min(cell, cumulative_.size() - 1);
  while (cell > 0 && probabilities_[cell] <= 0) --cell;
  Record r(domain_->size());
  for (int c = static_cast<int>(domain_->size()) - 1; c >= 0; --c) {
    size_t width = (*domain_)[c].bins.size();
    r[c] = static_cast<BinIndex>(cell % width);
    cell /= width;
  }
  return r;
}

nlohmann::json DenseModel::ToJson() const {
  nlohmann::json j;
  j["family"] = FamilyName(family_);
  j["universe_size"] = probabilities_.size();
  j["probabilities"] = probabilities_;
  return j;
}

double MutualInformationSensitivity(int64_t n) {
  const double nn = static_cast<double>(n);
  if (n <= 1) return 1.0;
  return (2.0 / nn) * std::log2((nn + 1.0) / 2.0) +
         ((nn - 1.0) / nn) * std::log2((nn + 1.0) / (nn - 1.0));
}

double MutualInformation(const Dataset& data, int x,
                         const std::vector<int>& parents) {
  if (parents.empty() || data.empty()) return 0.0;
  const Domain& d = data.domain();
  int64_t width = static_cast<int64_t>(d[x].bins.size());
  std::unordered_map<int64_t, int64_t> joint, parent_counts;
  std::vector<int64_t> x_counts(width, 0);
  for (const auto& [record, count] : data.counts()) {
    int64_t row = 0;
    for (int p : parents) {
      row = row * static_cast<int64_t>(d[p].bins.size()) + record[p];
    }
    joint[row * width + record[x]] += count;
    parent_counts[row] += count;
    x_counts[record[x]] += count;
  }
  const double n = static_cast<double>(data.size());
  double mi = 0.0;
  for (const auto& [cell, c] : joint) {
    double pxy = c / n;
    double px = x_counts[cell % width] / n;
    double py = parent_counts.at(cell / width) / n;
    mi += pxy * std::log2(pxy / (px * py));
  }
  return std::max(0.0, mi);
}

absl::StatusOr<std::unique_ptr<GenerativeModel>> Fit(
    const Dataset& transformed, const GeneratorSpec& spec, NoiseSource& noise,
    BudgetLedger& ledger) {
  if (absl::Status s = ValidateGeneratorSpec(spec); !s.ok()) return s;
  if (transformed.empty()) {
    return absl::InvalidArgumentError("cannot fit a model to empty data");
  }
  absl::StatusOr<std::unique_ptr<GenerativeModel>> model;
  std::string mechanism;
  switch (spec.family) {
    case Family::kIndependent:
      model = internal::FitIndependent(transformed, spec, noise);
      mechanism = "laplace marginals";
      break;
    case Family::kPrivBayesTheta:
    case Family::kPrivBayesDegree:
      model = internal::FitPrivBayes(transformed, spec, noise);
      mechanism = "exponential structure + laplace tables";
      break;
    case Family::kMwem:
      model = internal::FitMwem(transformed, spec, noise);
      mechanism = "exponential selection + laplace measurement";
      break;
  }
  if (!model.ok()) return model.status();
  if (absl::Status s = ledger.Charge({absl::StrCat("fit/", FamilyName(spec.family)),
                                      spec.epsilon_x,
                                      {0.0, "per-mechanism, see model"},
                                      mechanism, true});
      !s.ok()) {
    return s;
  }
  return model;
}

namespace internal {

absl::StatusOr<std::unique_ptr<GenerativeModel>> FitIndependent(
    const Dataset& data, const GeneratorSpec& spec, NoiseSource& noise) {
  const Domain& d = data.domain();
  const int cols = data.num_columns();
  // Replacing one record moves two cells of each histogram: L1 sensitivity
  // is 2 per marginal, and each marginal gets epsilon_x / d.
  const double scale = 2.0 * cols / ToDouble(spec.epsilon_x);
  std::vector<std::vector<double>> counts(cols);
  for (int c = 0; c < cols; ++c) counts[c].assign(d[c].bins.size(), 0.0);
  for (const auto& [record, count] : data.counts()) {
    for (int c = 0; c < cols; ++c) counts[c][record[c]] += count;
  }
  std::vector<BayesNetModel::Node> nodes;
  for (int c = 0; c < cols; ++c) {
    std::string purpose = absl::StrCat("independent/", d[c].name);
    double total = 0.0;
    for (double& v : counts[c]) {
      v = std::max(0.0, v + noise.Laplace(scale, purpose));
      total += v;
    }
    for (double& v : counts[c]) {
      v = total > 0 ? v / total : 1.0 / counts[c].size();
    }
    nodes.push_back({c, {}, counts[c]});
  }
  return std::unique_ptr<GenerativeModel>(new BayesNetModel(
      Family::kIndependent, data.shared_domain(), std::move(nodes)));
}

}  // namespace internal

}  // namespace dpsynth
