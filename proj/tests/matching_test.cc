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

#include <random>

#include "dpsynth/matching.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "test_util.h"

namespace dpsynth {
namespace {

using testing::FromRecords;
using testing::SmallDomain;

class BirthPredicateTest : public ::testing::Test {
 protected:
  void SetUp() override {
    Schema schema = testing::BirthSchema();
    TransformPlan plan = TransformPlan::Identity(schema);
    plan.alternatives[1] = "9-bin";
    plan.alternatives[2] = "5-bin";
    plan.alternatives[3] = "6-bin";
    plan.alternatives[5] = "100g";
    auto sample = ParseRawCsv(
        "birth_month,mother_age,parity,gestation_week,birth_sex,birth_weight\n"
        "1,30,1,39,M,3300\n",
        schema);
    ASSERT_TRUE(sample.ok());
    auto t = ApplyTransform(*sample, schema, plan);
    ASSERT_TRUE(t.ok());
    domain_ = t->shared_domain();
    base_ = t->Records()[0];
    auto p = MatchPredicate::Bind(DefaultMatchRules(), *domain_);
    ASSERT_TRUE(p.ok()) << p.status();
    predicate_ = *p;
  }
  Record With(int column, int delta) const {
    Record r = base_;
    r[column] = static_cast<BinIndex>(r[column] + delta);
    return r;
  }
  std::shared_ptr<const Domain> domain_;
  Record base_;
  MatchPredicate predicate_;
};

TEST_F(BirthPredicateTest, IdenticalRecordsMatch) {
  EXPECT_TRUE(predicate_.Matches(base_, base_));
}

TEST_F(BirthPredicateTest, OneAdjacentBinInATolerantColumn) {
  EXPECT_TRUE(predicate_.Matches(base_, With(3, -1)));  // gestation
  EXPECT_TRUE(predicate_.Matches(base_, With(5, 1)));   // weight
  EXPECT_FALSE(predicate_.Matches(base_, With(5, 2)));
}

TEST_F(BirthPredicateTest, ExactColumnsMustAgree) {
  EXPECT_FALSE(predicate_.Matches(base_, With(0, 1)));  // month
  EXPECT_FALSE(predicate_.Matches(base_, With(2, 1)));  // parity
  EXPECT_FALSE(predicate_.Matches(base_, With(4, 1)));  // sex
}

TEST_F(BirthPredicateTest, OnlyOneTolerantColumnMayDiffer) {
  Record both = With(1, -1);
  both[5] = static_cast<BinIndex>(both[5] + 1);
  EXPECT_FALSE(predicate_.Matches(base_, both));
}

TEST_F(BirthPredicateTest, AgeBinAroundThirtySevenIsExact) {
  // base is "30-34"; "35-39" holds 37 strictly inside.
  const ColumnSpec& age = (*domain_)[1];
  ASSERT_EQ(age.bins[base_[1] + 1].label, "35-39");
  EXPECT_FALSE(predicate_.Matches(base_, With(1, 1)));
  EXPECT_TRUE(predicate_.Matches(base_, With(1, -1)));
}

TEST_F(BirthPredicateTest, NeighborsAgreeWithMatches) {
  auto neighbors = predicate_.Neighbors(base_);
  EXPECT_EQ(neighbors.size(), 1u + 2 + 2 + 1);  // self, gest +-1, weight +-1, age -1
  for (const Record& r : neighbors) EXPECT_TRUE(predicate_.Matches(base_, r));
}

TEST(MatchPredicate, UnknownColumnRejected) {
  MatchRules rules;
  rules.tolerant_columns = {"nope"};
  EXPECT_FALSE(MatchPredicate::Bind(rules, *SmallDomain({2})).ok());
}

TEST(BetaMax, CompleteAndEmptyGraphs) {
  MatchGraph complete;
  complete.left_capacity = {1, 1, 1};
  complete.right_capacity = {1, 1, 1};
  complete.adjacency = {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}};
  EXPECT_EQ(BetaMax(complete), 1.0);
  MatchGraph empty;
  empty.left_capacity = {1, 1};
  empty.right_capacity = {1, 1};
  empty.adjacency = {{}, {}};
  EXPECT_EQ(BetaMax(empty), 0.0);
  EXPECT_EQ(BetaMax(MatchGraph{}), 0.0);
}

TEST(MaxMatching, RandomEightByEightEqualsBruteForce) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 40; ++trial) {
    const double p = 0.1 + 0.05 * (trial % 8);
    auto [adj, graph] = testing::RandomBipartite(8, 8, p, gen);
    EXPECT_EQ(MaxMatching(graph), testing::BruteForceMatching(adj)) << trial;
  }
}

// Multiplicities behave like expanded copies.
TEST(MaxMatching, CapacitiesEqualExpandedCopies) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 30; ++trial) {
    MatchGraph g;
    std::uniform_int_distribution<int> cap(1, 3);
    const int left = 3, right = 3;
    for (int i = 0; i < left; ++i) g.left_capacity.push_back(cap(gen));
    for (int j = 0; j < right; ++j) g.right_capacity.push_back(cap(gen));
    g.adjacency.resize(left);
    std::bernoulli_distribution edge(0.4);
    for (int i = 0; i < left; ++i) {
      for (int j = 0; j < right; ++j) {
        if (edge(gen)) g.adjacency[i].push_back(j);
      }
    }
    std::vector<int> lrow, rcol;
    for (int i = 0; i < left; ++i) lrow.insert(lrow.end(), g.left_capacity[i], i);
    for (int j = 0; j < right; ++j) rcol.insert(rcol.end(), g.right_capacity[j], j);
    const size_t width = std::max(lrow.size(), rcol.size());
    std::vector<std::vector<bool>> adj(lrow.size(), std::vector<bool>(width, false));
    for (size_t a = 0; a < lrow.size(); ++a) {
      for (size_t b = 0; b < rcol.size(); ++b) {
        for (int j : g.adjacency[lrow[a]]) adj[a][b] = adj[a][b] || j == rcol[b];
      }
    }
    EXPECT_EQ(MaxMatching(g), testing::BruteForceMatching(adj)) << trial;
  }
}

TEST(BuildMatchGraph, SizesMustAgree) {
  auto domain = SmallDomain({2, 3});
  auto p = MatchPredicate::Bind(MatchRules{{"c1"}, {}}, *domain);
  Dataset a = FromRecords(domain, {{0, 0}});
  Dataset b = FromRecords(domain, {{0, 0}, {1, 1}});
  EXPECT_FALSE(BuildMatchGraph(a, b, *p).ok());
}

TEST(BuildMatchGraph, SixRecordToyEqualsBruteForce) {
  auto domain = SmallDomain({2, 4});
  auto p = MatchPredicate::Bind(MatchRules{{"c1"}, {}}, *domain);
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Record> rs, ts;
    for (int i = 0; i < 6; ++i) {
      rs.push_back({static_cast<BinIndex>(gen() % 2), static_cast<BinIndex>(gen() % 4)});
      ts.push_back({static_cast<BinIndex>(gen() % 2), static_cast<BinIndex>(gen() % 4)});
    }
    auto g = BuildMatchGraph(FromRecords(domain, rs), FromRecords(domain, ts), *p);
    ASSERT_TRUE(g.ok());
    std::vector<std::vector<bool>> adj(6, std::vector<bool>(6));
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) adj[i][j] = p->Matches(rs[i], ts[j]);
    }
    EXPECT_DOUBLE_EQ(BetaMax(*g), testing::BruteForceMatching(adj) / 6.0);
  }
}

}  // namespace
}  // namespace dpsynth
