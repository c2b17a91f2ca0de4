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

#include <sstream>

#include "dpsynth/selection.h"
#include "dpsynth/tuning.h"
#include "gtest/gtest.h"
#include "selection_sim.h"

namespace dpsynth {
namespace {

using testing::SimulateSelection;

TrialResult<int> Scored(int candidate, double score, std::string id = "c") {
  TrialResult<int> t;
  t.candidate = candidate;
  t.score = score;
  t.id = std::move(id);
  return t;
}

TEST(SelectionParams, GammaZeroNeedsUnboundedIterations) {
  SelectionParams p;
  EXPECT_TRUE(ValidateSelectionParams(p).ok());
  p.max_iterations = 10;
  EXPECT_FALSE(ValidateSelectionParams(p).ok());
  p.max_iterations.reset();
  p.operational_cap = 0;
  EXPECT_FALSE(ValidateSelectionParams(p).ok());
}

TEST(SelectionParams, RangesChecked) {
  SelectionParams p;
  p.gamma = 1.5;
  EXPECT_FALSE(ValidateSelectionParams(p).ok());
  p.gamma = 0.0;
  p.epsilon0 = -0.1;
  EXPECT_FALSE(ValidateSelectionParams(p).ok());
}

TEST(SelectionParams, IterationBound) {
  // max{10 ln 2, 1 + 10/e} = 6.93 -> 7.
  EXPECT_EQ(MinimumIterations(0.1, 1.0), 7);
  // max{2 ln 4, 1 + 2/e} = 2.77 -> 3.
  EXPECT_EQ(MinimumIterations(0.5, 0.5), 3);
  SelectionParams p;
  p.gamma = 0.1;
  p.epsilon0 = 1.0;
  p.max_iterations = 6;
  EXPECT_FALSE(ValidateSelectionParams(p).ok());
  p.max_iterations = 7;
  EXPECT_TRUE(ValidateSelectionParams(p).ok());
  p.max_iterations.reset();
  EXPECT_FALSE(ValidateSelectionParams(p).ok());
  p.max_iterations = 7;
  p.epsilon0 = 0.0;
  EXPECT_FALSE(ValidateSelectionParams(p).ok());
}

TEST(Select, CertainPassStopsAtFirstIteration) {
  auto noise = NoiseSource::ForTesting(1);
  auto res = Select<int>(
      [](int64_t j) -> absl::StatusOr<TrialResult<int>> {
        return Scored(static_cast<int>(j), 1.0);
      },
      SelectionParams{}, *noise);
  EXPECT_EQ(res.iterations, 1);
  EXPECT_EQ(res.reason, StopReason::kAccepted);
  EXPECT_EQ(*res.output, 1);
}

TEST(Select, FirstPassingIterationWins) {
  auto noise = NoiseSource::ForTesting(1);
  auto res = Select<int>(
      [](int64_t j) -> absl::StatusOr<TrialResult<int>> {
        return Scored(static_cast<int>(j), j == 4 ? 1.0 : 0.0);
      },
      SelectionParams{}, *noise);
  EXPECT_EQ(res.iterations, 4);
  EXPECT_EQ(*res.output, 4);
}

TEST(Select, ErrorsCountAsFailures) {
  auto noise = NoiseSource::ForTesting(1);
  std::ostringstream audit;
  auto res = Select<int>(
      [](int64_t j) -> absl::StatusOr<TrialResult<int>> {
        if (j < 3) return absl::FailedPreconditionError("degenerate model");
        return Scored(7, 1.0, "cfg-7");
      },
      SelectionParams{}, *noise, &audit);
  EXPECT_EQ(res.iterations, 3);
  EXPECT_EQ(*res.output, 7);
  const std::string log = audit.str();
  EXPECT_NE(log.find("iteration=1 config=- pass=false"), std::string::npos);
  EXPECT_NE(log.find("error=\"degenerate model\""), std::string::npos);
  EXPECT_NE(log.find("iteration=3 config=cfg-7 pass=true seconds="),
            std::string::npos);
}

TEST(Select, OperationalCapStopsWithoutRelease) {
  auto noise = NoiseSource::ForTesting(1);
  SelectionParams p;
  p.operational_cap = 5;
  int calls = 0;
  auto res = Select<int>(
      [&](int64_t) -> absl::StatusOr<TrialResult<int>> {
        ++calls;
        return Scored(0, 0.0);
      },
      p, *noise);
  EXPECT_FALSE(res.output.has_value());
  EXPECT_EQ(res.reason, StopReason::kOperationalCap);
  EXPECT_EQ(calls, 5);
  EXPECT_EQ(StopReasonName(res.reason), "operational_cap");
}

TEST(Select, IterationBoundStops) {
  auto noise = NoiseSource::ForTesting(1);
  SelectionParams p;
  p.gamma = 1e-9;
  p.epsilon0 = 1.0;
  p.max_iterations = 3;
  auto res = Select<int>(
      [](int64_t) -> absl::StatusOr<TrialResult<int>> { return Scored(0, 0.0); },
      p, *noise);
  EXPECT_EQ(res.reason, StopReason::kIterationBound);
  EXPECT_EQ(res.iterations, 3);
}

TEST(Select, CoinDrawsUseSelectionPurpose) {
  MemoryTranscript sink;
  auto noise = NoiseSource::ForTesting(2, &sink);
  SelectionParams p;
  p.gamma = 0.5;
  p.epsilon0 = 1.0;
  p.max_iterations = 1000;
  auto res = Select<int>(
      [](int64_t) -> absl::StatusOr<TrialResult<int>> { return Scored(0, 0.0); },
      p, *noise);
  EXPECT_EQ(res.reason, StopReason::kCoin);
  ASSERT_EQ(sink.entries().size(), static_cast<size_t>(res.iterations));
  for (const auto& e : sink.entries()) EXPECT_EQ(e.purpose, "selection/coin");
}

TEST(Select, ExpectedIterationsWithinInverseP) {
  for (double p1 : {0.25, 0.5}) {
    auto stats = SimulateSelection(p1, SelectionParams{}, 4000, 21);
    EXPECT_LE(stats.mean_iterations, 1.0 / p1 + 3 * stats.se_iterations) << p1;
    EXPECT_EQ(stats.bottom_rate, 0.0);
  }
}

TEST(Select, BottomProbabilityBound) {
  SelectionParams p;
  p.gamma = 0.1;
  p.epsilon0 = 1.0;
  p.max_iterations = MinimumIterations(p.gamma, p.epsilon0);
  const int64_t runs = 4000;
  auto stats = SimulateSelection(0.5, p, runs, 22);
  const double bound = testing::BottomBound(0.5, p.gamma, p.epsilon0);
  const double se = std::sqrt(bound * (1 - bound) / runs);
  EXPECT_LE(stats.bottom_rate, bound + 3 * se);
  EXPECT_GT(stats.bottom_rate, 0.0);
  EXPECT_LE(stats.mean_iterations,
            1.0 / (0.5 * (1 - p.gamma) + p.gamma) + 3 * stats.se_iterations);
}

TEST(Select, OutputDistributionProportional) {
  auto chi = testing::OutputDistributionTest({0.1, 0.2, 0.3, 0.15, 0.25},
                                             {true, false, true, true, false},
                                             5000, 23);
  EXPECT_EQ(chi.dof, 2);
  EXPECT_GT(chi.p_value, 0.01) << chi.statistic;
}

TEST(Wilson, KnownIntervals) {
  auto [lo, hi] = WilsonInterval(5, 10, 1.96);
  EXPECT_NEAR(lo, 0.2365896, 1e-6);
  EXPECT_NEAR(hi, 0.7634104, 1e-6);
  std::tie(lo, hi) = WilsonInterval(0, 10, 1.96);
  EXPECT_NEAR(lo, 0.0, 1e-12);
  EXPECT_NEAR(hi, 0.2775402, 1e-6);
  std::tie(lo, hi) = WilsonInterval(20, 20, 1.96);
  EXPECT_NEAR(lo, 0.8388699, 1e-6);
  EXPECT_NEAR(hi, 1.0, 1e-12);
  std::tie(lo, hi) = WilsonInterval(3, 40, 1.96);
  EXPECT_NEAR(lo, 0.0258356, 1e-6);
  EXPECT_NEAR(hi, 0.1986453, 1e-6);
}

TEST(EstimatePassRates, CountsPassesAndErrors) {
  TuneOptions opt;
  opt.trials_per_config = 40;
  opt.threads = 4;
  auto rates = EstimatePassRates(3, opt, [](size_t index, uint64_t seed)
                                             -> absl::StatusOr<bool> {
    if (index == 0) return true;
    if (index == 1) return absl::InternalError("broken");
    return seed % 2 == 0;
  });
  ASSERT_EQ(rates.size(), 3u);
  EXPECT_EQ(rates[0].passes, 40);
  EXPECT_EQ(rates[0].rate, 1.0);
  EXPECT_EQ(rates[1].errors, 40);
  EXPECT_EQ(rates[1].rate, 0.0);
  EXPECT_EQ(rates[2].trials, 40);
  EXPECT_GT(rates[2].passes, 5);
  EXPECT_LT(rates[2].passes, 35);
  EXPECT_LE(rates[2].ci_low, rates[2].rate);
  EXPECT_GE(rates[2].ci_high, rates[2].rate);
}

TEST(EstimatePassRates, IndependentOfThreadCount) {
  auto trial = [](size_t, uint64_t seed) -> absl::StatusOr<bool> {
    return seed % 3 == 0;
  };
  TuneOptions one;
  one.trials_per_config = 30;
  TuneOptions four = one;
  four.threads = 4;
  auto a = EstimatePassRates(5, one, trial);
  auto b = EstimatePassRates(5, four, trial);
  for (size_t i = 0; i < 5; ++i) EXPECT_EQ(a[i].passes, b[i].passes);
}

}  // namespace
}  // namespace dpsynth
