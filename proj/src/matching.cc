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

#include "dpsynth/matching.h"

#include <algorithm>
#include <limits>
#include <queue>

#include "absl/strings/str_cat.h"

namespace dpsynth {

MatchRules DefaultMatchRules() {
  MatchRules rules;
  rules.tolerant_columns = {"mother_age", "gestation_week", "birth_weight"};
  rules.exact_if_strictly_inside["mother_age"] = {37};
  return rules;
}

absl::StatusOr<MatchPredicate> MatchPredicate::Bind(const MatchRules& rules,
                                                    const Domain& domain) {
  MatchPredicate p;
  p.tolerant_.assign(domain.size(), false);
  p.frozen_.resize(domain.size());
  for (size_t c = 0; c < domain.size(); ++c) {
    p.widths_.push_back(static_cast<int>(domain[c].bins.size()));
    p.frozen_[c].assign(domain[c].bins.size(), false);
  }
  for (const std::string& name : rules.tolerant_columns) {
    int c = ColumnIndex(domain, name);
    if (c < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("match rules name unknown column '", name, "'"));
    }
    p.tolerant_[c] = true;
  }
  for (const auto& [name, values] : rules.exact_if_strictly_inside) {
    int c = ColumnIndex(domain, name);
    if (c < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("match rules name unknown column '", name, "'"));
    }
    for (size_t b = 0; b < domain[c].bins.size(); ++b) {
      for (double v : values) {
        if (domain[c].bins[b].StrictlyInside(v)) p.frozen_[c][b] = true;
      }
    }
  }
  return p;
}

bool MatchPredicate::Matches(const Record& a, const Record& b) const {
  int moved = 0;
  for (size_t c = 0; c < a.size(); ++c) {
    if (a[c] == b[c]) continue;
    if (!tolerant_[c] || std::abs(a[c] - b[c]) != 1 || frozen_[c][a[c]] ||
        frozen_[c][b[c]] || ++moved > 1) {
      return false;
    }
  }
  return true;
}

std::vector<Record> MatchPredicate::Neighbors(const Record& a) const {
  std::vector<Record> out{a};
  for (size_t c = 0; c < a.size(); ++c) {
    if (!tolerant_[c] || frozen_[c][a[c]]) continue;
    for (int delta : {-1, 1}) {
      int v = a[c] + delta;
      if (v < 0 || v >= widths_[c] || frozen_[c][v]) continue;
      Record b = a;
      b[c] = static_cast<BinIndex>(v);
      out.push_back(std::move(b));
    }
  }
  return out;
}

int64_t MatchGraph::left_total() const {
  int64_t s = 0;
  for (int64_t c : left_capacity) s += c;
  return s;
}

int64_t MatchGraph::right_total() const {
  int64_t s = 0;
  for (int64_t c : right_capacity) s += c;
  return s;
}

absl::StatusOr<MatchGraph> BuildMatchGraph(const Dataset& released,
                                           const Dataset& transformed,
                                           const MatchPredicate& predicate) {
  if (released.size() != transformed.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("matching needs equal sizes, got ", released.size(),
                     " and ", transformed.size()));
  }
  if (released.num_columns() != transformed.num_columns()) {
    return absl::InvalidArgumentError("matching needs equal schemas");
  }
  MatchGraph g;
  std::map<Record, int> right_index;
  for (const auto& [r, c] : transformed.counts()) {
    right_index.emplace(r, static_cast<int>(g.right_capacity.size()));
    g.right_capacity.push_back(c);
  }
  for (const auto& [s, c] : released.counts()) {
    g.left_capacity.push_back(c);
    std::vector<int> adj;
    for (const Record& nb : predicate.Neighbors(s)) {
      auto it = right_index.find(nb);
      if (it != right_index.end()) adj.push_back(it->second);
    }
    g.adjacency.push_back(std::move(adj));
  }
  return g;
}

namespace {

// Dinic's algorithm on a unit-depth layered bipartite network.
class MaxFlow {
 public:
  explicit MaxFlow(int nodes) : head_(nodes, -1), level_(nodes), it_(nodes) {}

  void AddEdge(int u, int v, int64_t cap) {
    edges_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({u, head_[v], 0});
    head_[v] = static_cast<int>(edges_.size()) - 1;
  }

  int64_t Run(int s, int t) {
    int64_t flow = 0;
    while (Bfs(s, t)) {
      it_ = head_;
      while (int64_t f = Dfs(s, t, std::numeric_limits<int64_t>::max())) {
        flow += f;
      }
    }
    return flow;
  }

 private:
  struct Edge {
    int to;
    int next;
    int64_t cap;
  };

  bool Bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int e = head_[u]; e >= 0; e = edges_[e].next) {
        if (edges_[e].cap > 0 && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  // Iterative DFS is unnecessary: paths have length three.
  int64_t Dfs(int u, int t, int64_t limit) {
    if (u == t) return limit;
    for (int& e = it_[u]; e >= 0; e = edges_[e].next) {
      Edge& edge = edges_[e];
      if (edge.cap <= 0 || level_[edge.to] != level_[u] + 1) continue;
      int64_t f = Dfs(edge.to, t, std::min(limit, edge.cap));
      if (f > 0) {
        edge.cap -= f;
        edges_[e ^ 1].cap += f;
        return f;
      }
    }
    return 0;
  }

  std::vector<int> head_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<int> it_;
};

}  // namespace

int64_t MaxMatching(const MatchGraph& graph) {
  const int left = static_cast<int>(graph.left_capacity.size());
  const int right = static_cast<int>(graph.right_capacity.size());
  const int source = left + right;
  const int sink = source + 1;
  MaxFlow flow(sink + 1);
  for (int i = 0; i < left; ++i) {
    flow.AddEdge(source, i, graph.left_capacity[i]);
    for (int j : graph.adjacency[i]) {
      flow.AddEdge(i, left + j,
                   std::min(graph.left_capacity[i], graph.right_capacity[j]));
    }
  }
  for (int j = 0; j < right; ++j) {
    flow.AddEdge(left + j, sink, graph.right_capacity[j]);
  }
  return flow.Run(source, sink);
}

double BetaMax(const MatchGraph& graph) {
  int64_t n = graph.left_total();
  if (n == 0) return 0.0;
  return static_cast<double>(MaxMatching(graph)) / n;
}

}  // namespace dpsynth
