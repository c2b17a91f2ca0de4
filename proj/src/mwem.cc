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

#include <cmath>
#include <map>

#include "absl/strings/str_cat.h"
#include "dpsynth/synthesizers.h"

namespace dpsynth {
namespace internal {
namespace {

// Counting query over one cell of a 2-way marginal (1-way for d = 1).
struct CellQuery {
  int a = 0;
  int b = -1;
  BinIndex va = 0;
  BinIndex vb = 0;
};

class Universe {
 public:
  explicit Universe(const Domain& domain) : domain_(domain) {
    stride_.assign(domain.size(), 1);
    for (int c = static_cast<int>(domain.size()) - 2; c >= 0; --c) {
      stride_[c] = stride_[c + 1] * static_cast<int64_t>(domain[c + 1].bins.size());
    }
    size_ = UniverseSize(domain);
  }
  int64_t size() const { return size_; }
  int64_t Index(const Record& r) const {
    int64_t i = 0;
    for (size_t c = 0; c < r.size(); ++c) i += r[c] * stride_[c];
    return i;
  }
  int Digit(int64_t index, int c) const {
    return static_cast<int>((index / stride_[c]) % domain_[c].bins.size());
  }
  // Universe indices inside the query cell.
  std::vector<int64_t> Cells(const CellQuery& q) const {
    std::vector<int64_t> out;
    for (int64_t i = 0; i < size_; ++i) {
      if (Digit(i, q.a) == q.va && (q.b < 0 || Digit(i, q.b) == q.vb)) {
        out.push_back(i);
      }
    }
    return out;
  }

 private:
  const Domain& domain_;
  std::vector<int64_t> stride_;
  int64_t size_ = 1;
};

}  // namespace

absl::StatusOr<std::unique_ptr<GenerativeModel>> FitMwem(
    const Dataset& data, const GeneratorSpec& spec, NoiseSource& noise) {
  const Domain& domain = data.domain();
  const int d = data.num_columns();
  Universe universe(domain);
  if (universe.size() > kMaxDenseUniverse) {
    return absl::AbortedError(absl::StrCat(
        "universe of ", universe.size(), " cells is too large for MWEM"));
  }
  const int num_query = static_cast<int>(spec.hyperparameters.at("num_query"));
  const int rounds = static_cast<int>(spec.hyperparameters.at("num_iterations"));
  const int inner = static_cast<int>(spec.hyperparameters.at("num_inner_updates"));
  const double n = static_cast<double>(data.size());

  // Pool: a uniformly chosen column pair, then a uniformly chosen cell.
  std::vector<CellQuery> pool(num_query);
  {
    std::unique_ptr<RandomStream> rng = noise.Stream("mwem/pool");
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < d; ++a) {
      for (int b = a + 1; b < d; ++b) pairs.emplace_back(a, b);
    }
    for (CellQuery& q : pool) {
      if (pairs.empty()) {
        q.a = 0;
        q.va = static_cast<BinIndex>(rng->UniformInt(domain[0].bins.size()));
        continue;
      }
      auto [a, b] = pairs[rng->UniformInt(pairs.size())];
      q.a = a;
      q.b = b;
      q.va = static_cast<BinIndex>(rng->UniformInt(domain[a].bins.size()));
      q.vb = static_cast<BinIndex>(rng->UniformInt(domain[b].bins.size()));
    }
  }

  // True answers; used only through the exponential and Laplace mechanisms.
  std::vector<double> truth(num_query, 0.0);
  for (const auto& [record, count] : data.counts()) {
    for (int i = 0; i < num_query; ++i) {
      const CellQuery& q = pool[i];
      if (record[q.a] == q.va && (q.b < 0 || record[q.b] == q.vb)) {
        truth[i] += count;
      }
    }
  }

  std::vector<double> weights(universe.size(), 1.0 / universe.size());
  std::map<int, std::vector<int64_t>> cell_cache;
  auto cells_of = [&](int i) -> const std::vector<int64_t>& {
    auto it = cell_cache.find(i);
    if (it == cell_cache.end()) {
      it = cell_cache.emplace(i, universe.Cells(pool[i])).first;
    }
    return it->second;
  };
  auto answer = [&](int i) {
    double s = 0.0;
    for (int64_t c : cells_of(i)) s += weights[c];
    return s * n;
  };

  // Each round spends eps_x / T, half on selection and half on measurement.
  // A count moves by at most one when a record is replaced.
  const double eps_round = ToDouble(spec.epsilon_x) / rounds;
  std::vector<std::pair<int, double>> measurements;
  std::vector<double> estimate(num_query);
  for (int t = 0; t < rounds; ++t) {
    // Answers of the whole pool on the current distribution, via 2-way
    // marginals in one pass.
    std::map<std::pair<int, int>, std::vector<double>> marginals;
    for (const CellQuery& q : pool) {
      std::pair<int, int> key(q.a, q.b);
      if (!marginals.count(key)) {
        size_t wb = q.b < 0 ? 1 : domain[q.b].bins.size();
        marginals[key].assign(domain[q.a].bins.size() * wb, 0.0);
      }
    }
    for (int64_t i = 0; i < universe.size(); ++i) {
      if (weights[i] == 0.0) continue;
      for (auto& [key, m] : marginals) {
        size_t wb = key.second < 0 ? 1 : domain[key.second].bins.size();
        size_t vb = key.second < 0 ? 0 : universe.Digit(i, key.second);
        m[universe.Digit(i, key.first) * wb + vb] += weights[i];
      }
    }
    std::vector<double> scores(num_query);
    for (int i = 0; i < num_query; ++i) {
      const CellQuery& q = pool[i];
      size_t wb = q.b < 0 ? 1 : domain[q.b].bins.size();
      size_t vb = q.b < 0 ? 0 : q.vb;
      estimate[i] = marginals[{q.a, q.b}][q.va * wb + vb] * n;
      scores[i] = std::abs(truth[i] - estimate[i]);
    }
    // Re-selecting an already measured query is allowed.
    int pick = static_cast<int>(noise.ExponentialMechanism(
        scores, eps_round / 2.0, 1.0, "mwem/select"));
    double measured =
        truth[pick] + noise.Laplace(2.0 / eps_round, "mwem/measure");
    measurements.emplace_back(pick, measured);

    for (int u = 0; u < inner; ++u) {
      for (const auto& [qi, m] : measurements) {
        double current = answer(qi);
        double factor = std::exp((m - current) / (2.0 * n));
        double moved = 0.0;
        for (int64_t c : cells_of(qi)) {
          moved += weights[c] * (factor - 1.0);
          weights[c] *= factor;
        }
        double total = 1.0 + moved;
        for (double& w : weights) w /= total;
      }
    }
  }
  return std::unique_ptr<GenerativeModel>(
      new DenseModel(Family::kMwem, data.shared_domain(), std::move(weights)));
}

}  // namespace internal
}  // namespace dpsynth
