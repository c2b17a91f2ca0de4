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
#include <random>
#include <set>

#include "dpsynth/projection.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "test_util.h"

namespace dpsynth {
namespace {

using testing::FromRecords;
using testing::SmallDomain;

std::unique_ptr<RandomStream> TestStream(uint64_t seed) {
  static auto* sources = new std::vector<std::unique_ptr<NoiseSource>>();
  sources->push_back(NoiseSource::ForTesting(seed));
  return sources->back()->Stream("projection");
}

// a:1, b:1, c:2, d:5 over a single column.
Dataset ToyD() {
  auto domain = SmallDomain({4});
  Dataset d(domain);
  (void)d.Add({0}, 1);
  (void)d.Add({1}, 1);
  (void)d.Add({2}, 2);
  (void)d.Add({3}, 5);
  return d;
}

TEST(Projection, RejectsZeroMinCount) {
  auto rng = TestStream(1);
  EXPECT_FALSE(ProjectMinOccurrence(ToyD(), 0, *rng).ok());
  EXPECT_FALSE(ProjectMinOccurrenceLegacy(ToyD(), 0, *rng).ok());
}

TEST(Projection, ParseAlgorithm) {
  EXPECT_EQ(*ParseProjectionAlgorithm("primary"), ProjectionAlgorithm::kPrimary);
  EXPECT_EQ(*ParseProjectionAlgorithm("legacy"), ProjectionAlgorithm::kLegacy);
  EXPECT_FALSE(ParseProjectionAlgorithm("other").ok());
}

TEST(Projection, IdentityWhenEveryCountReachesMinCount) {
  auto domain = SmallDomain({3});
  Dataset d = FromRecords(domain, {{0}, {0}, {1}, {1}, {1}, {2}, {2}});
  for (int64_t m : {1, 2}) {
    auto rng = TestStream(m);
    EXPECT_EQ(*ProjectMinOccurrence(d, m, *rng), d);
    EXPECT_EQ(*ProjectMinOccurrenceLegacy(d, m, *rng), d);
  }
}

TEST(Projection, MinCountOneIsIdentity) {
  std::mt19937_64 gen(5);
  auto domain = SmallDomain({5, 5});
  for (int t = 0; t < 20; ++t) {
    Dataset d = testing::RandomDivisibleMultiset(domain, 1, 4, gen);
    auto rng = TestStream(t);
    EXPECT_EQ(*ProjectMinOccurrence(d, 1, *rng), d);
    EXPECT_EQ(*ProjectMinOccurrenceLegacy(d, 1, *rng), d);
  }
}

// Enumerated outcomes: exactly one of a, b is promoted; c and d untouched.
TEST(Projection, ToyExampleBothOutcomes) {
  const Dataset d = ToyD();
  std::set<Record> seen;
  for (uint64_t seed = 0; seed < 64; ++seed) {
    auto rng = TestStream(seed);
    ProjectionReport report;
    auto out = ProjectMinOccurrence(d, 2, *rng, &report);
    ASSERT_TRUE(out.ok());
    EXPECT_EQ(out->size(), 9);
    EXPECT_EQ(out->Count({2}), 2);
    EXPECT_EQ(out->Count({3}), 5);
    const bool a = out->Count({0}) == 2 && out->Count({1}) == 0;
    const bool b = out->Count({1}) == 2 && out->Count({0}) == 0;
    ASSERT_TRUE(a != b);
    seen.insert(a ? Record{0} : Record{1});
    EXPECT_EQ(report.promoted, 1);
    EXPECT_EQ(report.dropped, 1);
    EXPECT_EQ(report.duplicated, 0);
    EXPECT_EQ(report.mass_by_count.at(1), (std::pair<int64_t, int64_t>(2, 2)));
  }
  EXPECT_EQ(seen.size(), 2u);
}

// Under the divisibility condition every statement holds exactly,
// including per-level mass preservation.
TEST(Projection, PropertiesOnDivisibleMultisets) {
  std::mt19937_64 gen(11);
  auto domain = SmallDomain({6, 6});
  for (int t = 0; t < 500; ++t) {
    const int64_t m = 2 + t % 2;
    Dataset d = testing::RandomDivisibleMultiset(domain, m, 6, gen);
    auto rng = TestStream(t);
    ProjectionReport report;
    auto out = ProjectMinOccurrence(d, m, *rng, &report);
    ASSERT_TRUE(out.ok());
    std::string why;
    EXPECT_TRUE(testing::ProjectionPropertiesHold(d, *out, m, true, &why))
        << why;
    EXPECT_EQ(report.duplicated, 0);
    for (int64_t k = 1; k < m; ++k) {
      int64_t mass = 0;
      for (const Record& r : d.RecordsWithCount(k)) mass += out->Count(r);
      EXPECT_EQ(mass, k * d.NumWithCount(k));
    }
  }
}

// Without divisibility the size is restored by duplicating promoted
// records; original counts above m are never touched.
TEST(Projection, SizeRestoredOnArbitraryMultisets) {
  std::mt19937_64 gen(12);
  auto domain = SmallDomain({6, 6});
  std::uniform_int_distribution<int64_t> count(1, 5);
  for (int t = 0; t < 300; ++t) {
    const int64_t m = 2 + t % 2;
    Dataset d(domain);
    for (const Record& r : testing::Universe(*domain)) {
      if (gen() % 2) (void)d.Add(r, count(gen));
    }
    for (auto algorithm : {0, 1}) {
      auto rng = TestStream(t);
      ProjectionReport report;
      auto out = algorithm == 0
                     ? ProjectMinOccurrence(d, m, *rng, &report)
                     : ProjectMinOccurrenceLegacy(d, m, *rng, &report);
      ASSERT_TRUE(out.ok());
      std::string why;
      if (report.promoted > 0) {
        EXPECT_TRUE(testing::ProjectionPropertiesHold(d, *out, m, false, &why))
            << why;
      }
      EXPECT_EQ(out->size(), d.size());
      EXPECT_GE(out->MinCount(), m);
    }
  }
}

TEST(Projection, WithoutRestorationPrimaryKeepsPromotedMass) {
  auto domain = SmallDomain({10});
  Dataset d(domain);
  for (BinIndex i = 0; i < 7; ++i) (void)d.Add({i}, 1);
  (void)d.Add({7}, 4);
  auto rng = TestStream(3);
  ProjectionReport report;
  auto out = ProjectMinOccurrence(d, 2, *rng, &report, false);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(report.promoted, 3);  // floor(7 / 2)
  EXPECT_EQ(out->size(), 10);
  EXPECT_EQ(report.mass_by_count.at(1), (std::pair<int64_t, int64_t>(7, 6)));
}

TEST(Projection, EverythingDroppedCannotRestore) {
  auto domain = SmallDomain({3});
  Dataset d = FromRecords(domain, {{0}});
  auto rng = TestStream(1);
  EXPECT_FALSE(ProjectMinOccurrence(d, 2, *rng).ok());
}

TEST(ProjectionLegacy, FirstLevelHalvesSingletons) {
  auto domain = SmallDomain({20});
  Dataset d(domain);
  for (BinIndex i = 0; i < 10; ++i) (void)d.Add({i}, 1);
  auto rng = TestStream(2);
  ProjectionReport report;
  auto out = ProjectMinOccurrenceLegacy(d, 2, *rng, &report);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(report.promoted, 5);
  EXPECT_EQ(report.duplicated, 0);
  EXPECT_EQ(out->size(), 10);
}

// |R_k| = (1/(k+1)) * sum_{t<=k} t * n_t when (m!/k!) divides n_k.
TEST(ProjectionLegacy, SurvivorCountFormula) {
  auto domain = SmallDomain({60});
  Dataset d(domain);
  BinIndex next = 0;
  for (int i = 0; i < 12; ++i) (void)d.Add({next++}, 1);  // 3!/1! | 12
  for (int i = 0; i < 6; ++i) (void)d.Add({next++}, 2);   // 3!/2! | 6
  (void)d.Add({next++}, 7);
  auto rng = TestStream(4);
  ProjectionReport report;
  auto out = ProjectMinOccurrenceLegacy(d, 3, *rng, &report);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(report.promoted, (12 + 2 * 6) / 3);
  EXPECT_EQ(report.duplicated, 0);
  EXPECT_EQ(out->size(), d.size());
}

// Per-level mass is preserved in expectation: 10^4 runs, 3 standard errors.
TEST(ProjectionLegacy, MassPreservedInExpectation) {
  auto domain = SmallDomain({20});
  Dataset d(domain);
  BinIndex next = 0;
  for (int i = 0; i < 6; ++i) (void)d.Add({next++}, 1);
  for (int i = 0; i < 3; ++i) (void)d.Add({next++}, 2);
  (void)d.Add({next++}, 5);
  auto source = NoiseSource::ForTesting(99);
  auto rng = source->Stream("projection");
  const int runs = 10000;
  std::map<int64_t, std::pair<double, double>> sums;  // sum, sum of squares
  for (int r = 0; r < runs; ++r) {
    auto out = ProjectMinOccurrenceLegacy(d, 3, *rng);
    ASSERT_TRUE(out.ok());
    for (int64_t k : {1, 2}) {
      double mass = 0;
      for (const Record& x : d.RecordsWithCount(k)) mass += out->Count(x);
      sums[k].first += mass;
      sums[k].second += mass * mass;
    }
  }
  for (int64_t k : {1, 2}) {
    const double mean = sums[k].first / runs;
    const double var = sums[k].second / runs - mean * mean;
    const double se = std::sqrt(var / runs);
    const double expected = static_cast<double>(k * d.NumWithCount(k));
    EXPECT_LE(std::abs(mean - expected), 3 * se) << "k=" << k;
  }
}

}  // namespace
}  // namespace dpsynth
