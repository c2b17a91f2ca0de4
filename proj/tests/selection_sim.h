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

// Monte-Carlo harness for private selection with mock trials.

#ifndef DPSYNTH_TESTS_SELECTION_SIM_H_
#define DPSYNTH_TESTS_SELECTION_SIM_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "boost/math/distributions/chi_squared.hpp"
#include "dpsynth/noise.h"
#include "dpsynth/selection.h"

namespace dpsynth {
namespace testing {

struct SelectionStats {
  double mean_iterations = 0.0;
  double se_iterations = 0.0;
  double bottom_rate = 0.0;  // fraction of runs ending without output
  int64_t runs = 0;
};

// Runs Select `runs` times with a trial that passes with probability p1.
inline SelectionStats SimulateSelection(double p1, const SelectionParams& params,
                                        int64_t runs, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution pass(p1);
  auto noise = NoiseSource::ForTesting(seed ^ 0x9e3779b97f4a7c15ULL);
  SelectionStats stats;
  stats.runs = runs;
  double sum = 0.0, sum_sq = 0.0;
  int64_t bottom = 0;
  for (int64_t r = 0; r < runs; ++r) {
    SelectionResult<int> res = Select<int>(
        [&](int64_t) -> absl::StatusOr<TrialResult<int>> {
          TrialResult<int> t;
          t.candidate = 1;
          t.score = pass(gen) ? 1.0 : 0.0;
          return t;
        },
        params, *noise);
    sum += static_cast<double>(res.iterations);
    sum_sq += static_cast<double>(res.iterations * res.iterations);
    if (!res.output.has_value()) ++bottom;
  }
  stats.mean_iterations = sum / runs;
  const double var = sum_sq / runs - stats.mean_iterations * stats.mean_iterations;
  stats.se_iterations = std::sqrt(std::max(0.0, var) / runs);
  stats.bottom_rate = static_cast<double>(bottom) / runs;
  return stats;
}

struct ChiSquareOutcome {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

// Discrete mock trial: candidate i is drawn with weight `weights[i]` and
// passes when `passes[i]`. The released candidates are compared with the
// joint distribution restricted to passing candidates.
inline ChiSquareOutcome OutputDistributionTest(
    const std::vector<double>& weights, const std::vector<bool>& passes,
    int64_t runs, uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::discrete_distribution<int> draw(weights.begin(), weights.end());
  auto noise = NoiseSource::ForTesting(seed + 1);
  SelectionParams params;
  std::vector<int64_t> observed(weights.size(), 0);
  int64_t released = 0;
  for (int64_t r = 0; r < runs; ++r) {
    SelectionResult<int> res = Select<int>(
        [&](int64_t) -> absl::StatusOr<TrialResult<int>> {
          TrialResult<int> t;
          t.candidate = draw(gen);
          t.score = passes[*t.candidate] ? 1.0 : 0.0;
          return t;
        },
        params, *noise);
    if (res.output.has_value()) {
      ++observed[*res.output];
      ++released;
    }
  }
  double pass_mass = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (passes[i]) pass_mass += weights[i];
  }
  ChiSquareOutcome out;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (!passes[i]) {
      // A failing candidate must never be released.
      if (observed[i] > 0) out.statistic = INFINITY;
      continue;
    }
    const double expected = released * weights[i] / pass_mass;
    const double d = observed[i] - expected;
    out.statistic += d * d / expected;
    ++out.dof;
  }
  out.dof -= 1;
  if (std::isinf(out.statistic) || out.dof < 1) {
    out.p_value = 0.0;
  } else {
    boost::math::chi_squared dist(out.dof);
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  }
  return out;
}

// Upper bound on the probability of a run ending without output.
inline double BottomBound(double p1, double gamma, double epsilon0) {
  return (1.0 - p1) * (1.0 + epsilon0 / 2.0) / p1 * gamma;
}

}  // namespace testing
}  // namespace dpsynth

#endif  // DPSYNTH_TESTS_SELECTION_SIM_H_
