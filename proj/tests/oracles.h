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

// Exhaustive sensitivity checks: every dataset pair that differs in one
// record, over small universes, compared against the analytic bound.

#ifndef DPSYNTH_TESTS_ORACLES_H_
#define DPSYNTH_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dpsynth/criteria.h"
#include "dpsynth/dataset.h"
#include "dpsynth/matching.h"
#include "dpsynth/regression.h"
#include "test_util.h"

namespace dpsynth {
namespace testing {

struct OracleResult {
  // max over pairs of |f(D) - f(D')| - bound; at most rounding when sound.
  double worst_excess = -INFINITY;
  // Some pair meets the bound.
  bool tight = false;
  int64_t pairs = 0;
  bool ok = true;  // every evaluation succeeded

  void Observe(double gap, double bound) {
    ++pairs;
    worst_excess = std::max(worst_excess, gap - bound);
    if (std::abs(gap - bound) <= 1e-12 * std::max(1.0, bound)) tight = true;
  }
  bool Sound() const { return ok && worst_excess <= 1e-12; }
};

inline std::vector<Record> Pick(const std::vector<Record>& universe,
                                const std::vector<int>& idx) {
  std::vector<Record> out;
  for (int i : idx) out.push_back(universe[i]);
  return out;
}

// Calls f(D, D') for every multiset D of size n over `universe` and every
// D' obtained by replacing one record of D.
inline void ForEachReplacementPair(
    const std::vector<Record>& universe, int n,
    const std::function<void(const std::vector<Record>&,
                             const std::vector<Record>&)>& f) {
  ForEachMultiset(universe.size(), n, [&](const std::vector<int>& idx) {
    std::vector<Record> d = Pick(universe, idx);
    for (int i = 0; i < n; ++i) {
      if (i > 0 && idx[i] == idx[i - 1]) continue;
      for (size_t u = 0; u < universe.size(); ++u) {
        if (static_cast<int>(u) == idx[i]) continue;
        std::vector<Record> nb = d;
        nb[i] = universe[u];
        f(d, nb);
      }
    }
  });
}

// Absolute marginal error, bound 1/n, for every candidate S of size n.
inline OracleResult AbsMarginalOracle(const std::vector<int>& widths, int n) {
  OracleResult res;
  auto domain = SmallDomain(widths);
  std::vector<Record> universe = Universe(*domain);
  std::vector<std::vector<Record>> candidates;
  ForEachMultiset(universe.size(), n, [&](const std::vector<int>& idx) {
    candidates.push_back(Pick(universe, idx));
  });
  // A spread of candidates keeps the run short on the larger universes.
  const size_t stride = std::max<size_t>(1, candidates.size() / 12);
  for (size_t c = 0; c < candidates.size(); c += stride) {
    Dataset s = FromRecords(domain, candidates[c]);
    ForEachReplacementPair(universe, n,
                           [&](const std::vector<Record>& a,
                               const std::vector<Record>& b) {
      auto fa = AbsMarginalError(FromRecords(domain, a), s);
      auto fb = AbsMarginalError(FromRecords(domain, b), s);
      if (!fa.ok() || !fb.ok()) {
        res.ok = false;
        return;
      }
      res.Observe(std::abs(*fa - *fb), 1.0 / n);
    });
  }
  return res;
}

// Clipped relative error. The bound depends on the candidate S through
// s_min and s_max of its 1-way counts; every S with lambda > 1 + 1/s_max.
inline OracleResult ClippedRelativeOracle(const std::vector<int>& widths,
                                          int n, double lambda) {
  OracleResult res;
  auto domain = SmallDomain(widths);
  std::vector<Record> universe = Universe(*domain);
  ForEachMultiset(universe.size(), n, [&](const std::vector<int>& sidx) {
    Dataset s = FromRecords(domain, Pick(universe, sidx));
    std::vector<int64_t> q = OneWayCounts(s);
    const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
    auto bound = ClippedRelativeSensitivity(lambda, *lo, *hi);
    if (!bound.ok()) return;  // outside the bound's domain
    ForEachReplacementPair(universe, n,
                           [&](const std::vector<Record>& a,
                               const std::vector<Record>& b) {
      auto fa = Relative1WayErrorClipped(FromRecords(domain, a), s, lambda);
      auto fb = Relative1WayErrorClipped(FromRecords(domain, b), s, lambda);
      if (!fa.ok() || !fb.ok()) {
        res.ok = false;
        return;
      }
      res.Observe(std::abs(*fa - *fb), *bound);
    });
  });
  return res;
}

// Resized mean over value lists in [L, U] = [0, 10]. Priorities follow list
// order, so enumerating ordered lists covers every priority ranking. A
// neighbor replaces, inserts (at any rank) or removes one value; m and w
// stay fixed because they come from S.
inline OracleResult ResizedMeanOracle(int max_n) {
  OracleResult res;
  const std::vector<double> values = {0.0, 4.0, 10.0};
  const double range = 10.0;
  auto mean_of = [&](const std::vector<double>& x, int64_t m, double w) {
    std::vector<double> pr(x.size());
    std::iota(pr.begin(), pr.end(), 0.0);
    return ResizedMean(x, m, w, pr);
  };
  for (int n = 0; n <= max_n; ++n) {
    std::vector<int> digits(n, 0);
    while (true) {
      std::vector<double> x;
      for (int d : digits) x.push_back(values[d]);
      for (int64_t m = 1; m <= max_n + 2; ++m) {
        for (double w : {0.0, 3.0, 10.0}) {
          auto base = mean_of(x, m, w);
          if (!base.ok()) {
            res.ok = false;
            continue;
          }
          auto visit = [&](const std::vector<double>& y) {
            auto v = mean_of(y, m, w);
            if (!v.ok()) {
              res.ok = false;
              return;
            }
            res.Observe(std::abs(*v - *base), range / m);
          };
          for (int i = 0; i < n; ++i) {
            for (double v : values) {
              if (v == x[i]) continue;
              std::vector<double> y = x;
              y[i] = v;
              visit(y);
            }
            std::vector<double> y = x;
            y.erase(y.begin() + i);
            visit(y);
          }
          for (int pos = 0; pos <= n; ++pos) {
            for (double v : values) {
              std::vector<double> y = x;
              y.insert(y.begin() + pos, v);
              visit(y);
            }
          }
        }
      }
      int i = n - 1;
      while (i >= 0 && digits[i] == static_cast<int>(values.size()) - 1) {
        digits[i--] = 0;
      }
      if (i < 0) break;
      ++digits[i];
    }
  }
  return res;
}

// |MAE_R(a) - MAE_R(b)| for fixed coefficient vectors, bound 2(U - L)/n.
// One feature with three bins and a target with three bins on [0, 2].
inline OracleResult MaeOracle(int n) {
  OracleResult res;
  auto domain = SmallDomain({3, 3});
  std::vector<Record> universe = Universe(*domain);
  absl::StatusOr<RegressionDesign> design = MakeDesign(*domain, "c1");
  if (!design.ok()) {
    res.ok = false;
    return res;
  }
  const Standardization st{{1.0}, {0.8}};
  const std::vector<std::vector<double>> coefs = {
      {0.0, 0.0}, {2.0, 0.0}, {1.0, 0.7}, {-3.0, 2.5}, {5.0, -1.0}};
  const double range = 2.0;
  ForEachReplacementPair(universe, n,
                         [&](const std::vector<Record>& a,
                             const std::vector<Record>& b) {
    Dataset da = FromRecords(domain, a);
    Dataset db = FromRecords(domain, b);
    for (size_t i = 0; i < coefs.size(); ++i) {
      for (size_t j = i + 1; j < coefs.size(); ++j) {
        double fa = std::abs(ClippedMae(da, *design, st, coefs[i]) -
                             ClippedMae(da, *design, st, coefs[j]));
        double fb = std::abs(ClippedMae(db, *design, st, coefs[i]) -
                             ClippedMae(db, *design, st, coefs[j]));
        res.Observe(std::abs(fa - fb), 2.0 * range / n);
      }
    }
  });
  return res;
}

// Faithfulness error 1 - beta_max, bound 1/n, for every candidate S.
inline OracleResult FaithfulnessOracle(const std::vector<int>& widths, int n) {
  OracleResult res;
  auto domain = SmallDomain(widths);
  std::vector<Record> universe = Universe(*domain);
  MatchRules rules;
  rules.tolerant_columns = {"c1"};
  ForEachMultiset(universe.size(), n, [&](const std::vector<int>& sidx) {
    Dataset s = FromRecords(domain, Pick(universe, sidx));
    ForEachReplacementPair(universe, n,
                           [&](const std::vector<Record>& a,
                               const std::vector<Record>& b) {
      auto fa = FaithfulnessError(FromRecords(domain, a), s, rules);
      auto fb = FaithfulnessError(FromRecords(domain, b), s, rules);
      if (!fa.ok() || !fb.ok()) {
        res.ok = false;
        return;
      }
      res.Observe(std::abs(*fa - *fb), 1.0 / n);
    });
  });
  return res;
}

// Largest matching of a unit-capacity bipartite graph, by trying every
// injection of the left side into the right side (left <= right).
inline int BruteForceMatching(const std::vector<std::vector<bool>>& adj) {
  const size_t left = adj.size();
  const size_t right = left == 0 ? 0 : adj[0].size();
  std::vector<int> perm(right);
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int size = 0;
    for (size_t i = 0; i < left && i < right; ++i) size += adj[i][perm[i]];
    best = std::max(best, size);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// A random unit-capacity graph with edge probability p, as a matrix and as
// a MatchGraph.
inline std::pair<std::vector<std::vector<bool>>, MatchGraph> RandomBipartite(
    int left, int right, double p, std::mt19937_64& gen) {
  std::bernoulli_distribution edge(p);
  std::vector<std::vector<bool>> adj(left, std::vector<bool>(right, false));
  MatchGraph g;
  g.left_capacity.assign(left, 1);
  g.right_capacity.assign(right, 1);
  g.adjacency.resize(left);
  for (int i = 0; i < left; ++i) {
    for (int j = 0; j < right; ++j) {
      if (edge(gen)) {
        adj[i][j] = true;
        g.adjacency[i].push_back(j);
      }
    }
  }
  return {adj, g};
}

// Random multiset over `domain` in which m divides k * n_k for every k < m.
// Counts range over 1..max_count.
inline Dataset RandomDivisibleMultiset(std::shared_ptr<const Domain> domain,
                                       int64_t m, int64_t max_count,
                                       std::mt19937_64& gen) {
  std::vector<Record> universe = Universe(*domain);
  std::shuffle(universe.begin(), universe.end(), gen);
  std::uniform_int_distribution<int64_t> count(1, max_count);
  std::map<int64_t, std::vector<Record>> by_count;
  for (const Record& r : universe) {
    if (gen() % 3 != 0) by_count[count(gen)].push_back(r);
  }
  Dataset out(domain);
  for (auto& [k, records] : by_count) {
    size_t keep = records.size();
    if (k < m) {
      const int64_t step = m / std::gcd(k, m);
      keep -= keep % step;
    }
    for (size_t i = 0; i < keep; ++i) (void)out.Add(records[i], k);
  }
  return out;
}

// Checks the projection statements: Rec(out) within Rec(in); counts above m
// are kept as a set; records at m stay at m; no count below m; equal size.
// `exact_levels` also requires Rec(out, #=k) == Rec(in, #=k) for k > m.
inline bool ProjectionPropertiesHold(const Dataset& in, const Dataset& out,
                                     int64_t m, bool exact_levels,
                                     std::string* why) {
  for (const auto& [r, c] : out.counts()) {
    const int64_t before = in.Count(r);
    if (before == 0) {
      *why = "output holds a record absent from the input";
      return false;
    }
    if (c < m) {
      *why = "output holds a record below min_count";
      return false;
    }
  }
  for (const auto& [r, c] : in.counts()) {
    if (c > m && out.Count(r) != c) {
      *why = "a count above min_count changed";
      return false;
    }
    if (exact_levels && c == m && out.Count(r) != m) {
      *why = "a record at min_count changed";
      return false;
    }
  }
  if (exact_levels) {
    for (const auto& [r, c] : out.counts()) {
      if (c > m && in.Count(r) != c) {
        *why = "a new record appeared above min_count";
        return false;
      }
    }
  }
  if (out.size() != in.size()) {
    *why = "size changed";
    return false;
  }
  return true;
}

}  // namespace testing
}  // namespace dpsynth

#endif  // DPSYNTH_TESTS_ORACLES_H_
