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

// Greedy PrivBayes: the first node is uniform, each later node and its
// parent set are chosen by the exponential mechanism on mutual information,
// and conditional tables come from Laplace-noised joint counts.

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "dpsynth/synthesizers.h"

namespace dpsynth {
namespace internal {
namespace {

constexpr int64_t kMaxTableCells = int64_t{1} << 26;

double DomainProduct(const std::vector<int>& cols, const Domain& domain) {
  double p = 1.0;
  for (int c : cols) p *= static_cast<double>(domain[c].bins.size());
  return p;
}

}  // namespace

std::vector<std::vector<int>> MaximalParentSets(const std::vector<int>& chosen,
                                                const Domain& domain,
                                                double max_cells) {
  std::vector<std::vector<int>> out;
  const size_t k = chosen.size();
  for (uint32_t mask = 1; mask < (1u << k); ++mask) {
    std::vector<int> subset;
    for (size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) subset.push_back(chosen[i]);
    }
    double cells = DomainProduct(subset, domain);
    if (cells > max_cells) continue;
    bool maximal = true;
    for (size_t i = 0; i < k && maximal; ++i) {
      if (mask & (1u << i)) continue;
      if (cells * domain[chosen[i]].bins.size() <= max_cells) maximal = false;
    }
    if (maximal) out.push_back(std::move(subset));
  }
  if (out.empty()) out.push_back({});
  return out;
}

std::vector<std::vector<int>> DegreeParentSets(const std::vector<int>& chosen,
                                               int degree) {
  const int k = static_cast<int>(chosen.size());
  const int size = std::min(degree, k);
  std::vector<std::vector<int>> out;
  std::vector<bool> pick(k, false);
  std::fill(pick.begin(), pick.begin() + size, true);
  do {
    std::vector<int> subset;
    for (int i = 0; i < k; ++i) {
      if (pick[i]) subset.push_back(chosen[i]);
    }
    out.push_back(std::move(subset));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

absl::StatusOr<std::unique_ptr<GenerativeModel>> FitPrivBayes(
    const Dataset& data, const GeneratorSpec& spec, NoiseSource& noise) {
  const Domain& domain = data.domain();
  const int d = data.num_columns();
  const double n = static_cast<double>(data.size());
  const double eps_x = ToDouble(spec.epsilon_x);
  const double split = spec.hyperparameters.at("epsilon_split");
  const double eps_struct = eps_x * split;
  const double eps_dist = eps_x - eps_struct;
  const bool theta_flavor = spec.family == Family::kPrivBayesTheta;
  // Cells a noisy table may have while keeping the average count per cell
  // at least theta times the noise scale 2d / eps_dist.
  const double cell_bound =
      theta_flavor ? eps_dist * n / (2.0 * d * spec.hyperparameters.at("theta"))
                   : 0.0;
  const int degree =
      theta_flavor ? 0 : static_cast<int>(spec.hyperparameters.at("degree"));

  std::vector<BayesNetModel::Node> nodes;
  std::vector<int> chosen;
  std::vector<int> remaining;
  for (int c = 0; c < d; ++c) remaining.push_back(c);

  // Every score of the first pick is zero, so it is uniform and free.
  int first = static_cast<int>(noise.UniformInt(d, "privbayes/first"));
  chosen.push_back(first);
  remaining.erase(std::find(remaining.begin(), remaining.end(), first));
  nodes.push_back({first, {}, {}});

  const double sensitivity = MutualInformationSensitivity(data.size());
  const double eps_step = d > 1 ? eps_struct / (d - 1) : 0.0;
  while (!remaining.empty()) {
    std::vector<std::pair<int, std::vector<int>>> candidates;
    for (int x : remaining) {
      std::vector<std::vector<int>> sets =
          theta_flavor
              ? MaximalParentSets(chosen, domain,
                                  cell_bound / domain[x].bins.size())
              : DegreeParentSets(chosen, degree);
      for (std::vector<int>& s : sets) candidates.emplace_back(x, std::move(s));
    }
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& [x, parents] : candidates) {
      scores.push_back(MutualInformation(data, x, parents));
    }
    size_t pick = noise.ExponentialMechanism(scores, eps_step, sensitivity,
                                             "privbayes/structure");
    auto& [x, parents] = candidates[pick];
    nodes.push_back({x, parents, {}});
    chosen.push_back(x);
    remaining.erase(std::find(remaining.begin(), remaining.end(), x));
  }

  // Replacing one record moves two cells of each joint table, and each of
  // the d tables receives eps_dist / d.
  const double scale = 2.0 * d / eps_dist;
  std::unique_ptr<RandomStream> rng = noise.Stream("privbayes/tables");
  for (BayesNetModel::Node& node : nodes) {
    const int64_t width = static_cast<int64_t>(domain[node.attribute].bins.size());
    const double rows = DomainProduct(node.parents, domain);
    if (rows * width > kMaxTableCells) {
      return absl::AbortedError(absl::StrCat(
          "conditional table for '", domain[node.attribute].name, "' has ",
          rows * width, " cells"));
    }
    std::vector<double> table(static_cast<size_t>(rows) * width, 0.0);
    for (const auto& [record, count] : data.counts()) {
      int64_t row = 0;
      for (int p : node.parents) {
        row = row * static_cast<int64_t>(domain[p].bins.size()) + record[p];
      }
      table[row * width + record[node.attribute]] += count;
    }
    for (double& v : table) v = std::max(0.0, v + rng->Laplace(scale));
    for (size_t r = 0; r < static_cast<size_t>(rows); ++r) {
      double* row = table.data() + r * width;
      double total = 0.0;
      for (int64_t i = 0; i < width; ++i) total += row[i];
      for (int64_t i = 0; i < width; ++i) {
        row[i] = total > 0 ? row[i] / total : 1.0 / width;
      }
    }
    node.table = std::move(table);
  }
  return std::unique_ptr<GenerativeModel>(
      new BayesNetModel(spec.family, data.shared_domain(), std::move(nodes)));
}

}  // namespace internal
}  // namespace dpsynth
