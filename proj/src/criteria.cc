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

#include "dpsynth/criteria.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "absl/strings/str_cat.h"
#include "dpsynth/laplace.h"

namespace dpsynth {
namespace {

absl::Status CheckComparable(const Dataset& r, const Dataset& s) {
  if (r.num_columns() != s.num_columns()) {
    return absl::InvalidArgumentError("datasets have different schemas");
  }
  for (int c = 0; c < r.num_columns(); ++c) {
    if (r.domain()[c].name != s.domain()[c].name ||
        r.domain()[c].bins.size() != s.domain()[c].bins.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "datasets disagree on column ", c, " ('", r.domain()[c].name, "')"));
    }
  }
  if (r.size() != s.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "datasets have different sizes ", r.size(), " and ", s.size()));
  }
  return absl::OkStatus();
}

double ClippedRatio(double a, double b, double lambda) {
  return ClipUnchecked(a / b, 1.0, lambda);
}

struct Group {
  std::vector<double> r_values;
  double s_sum = 0.0;
  int64_t s_count = 0;
};

}  // namespace

std::string CriterionTypeName(CriterionType type) {
  switch (type) {
    case CriterionType::kAbsMarginal:
      return "abs_marginal";
    case CriterionType::kRelative1Way:
      return "relative_1way";
    case CriterionType::kConditionalMean:
      return "conditional_mean";
    case CriterionType::kLrCoefficients:
      return "lr_coefficients";
    case CriterionType::kLrMae:
      return "lr_mae";
    case CriterionType::kFaithfulness:
      return "faithfulness";
  }
  return "unknown";
}

absl::StatusOr<CriterionType> ParseCriterionType(const std::string& name) {
  for (CriterionType t :
       {CriterionType::kAbsMarginal, CriterionType::kRelative1Way,
        CriterionType::kConditionalMean, CriterionType::kLrCoefficients,
        CriterionType::kLrMae, CriterionType::kFaithfulness}) {
    if (CriterionTypeName(t) == name) return t;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown criterion type '", name, "'"));
}

std::vector<CriterionSpec> DefaultCriteria() {
  std::vector<CriterionSpec> out(8);
  out[0].label = "abs_marginal";
  out[0].type = CriterionType::kAbsMarginal;
  out[0].threshold = 0.01;
  out[0].epsilon = Epsilon(1, 100);

  out[1].label = "relative_1way";
  out[1].type = CriterionType::kRelative1Way;
  out[1].threshold = 1.4;
  out[1].epsilon = Epsilon(30, 100);

  out[2].label = "mean_parity";
  out[2].type = CriterionType::kConditionalMean;
  out[2].column = "parity";
  out[2].group_by = {"mother_age"};
  out[2].threshold = 0.3;
  out[2].epsilon = Epsilon(1, 100);

  out[3].label = "mean_birth_weight";
  out[3].type = CriterionType::kConditionalMean;
  out[3].column = "birth_weight";
  out[3].group_by = {"birth_sex", "parity", "gestation_week", "mother_age"};
  out[3].threshold = 100;
  out[3].epsilon = Epsilon(17, 100);

  out[4].label = "mean_gestation_week";
  out[4].type = CriterionType::kConditionalMean;
  out[4].column = "gestation_week";
  out[4].group_by = {"parity", "mother_age"};
  out[4].threshold = 1;
  out[4].epsilon = Epsilon(2, 100);

  out[5].label = "lr_coefficients";
  out[5].type = CriterionType::kLrCoefficients;
  out[5].column = "birth_weight";
  out[5].threshold = 30;
  out[5].epsilon = Epsilon(43, 100);

  out[6].label = "lr_mae";
  out[6].type = CriterionType::kLrMae;
  out[6].column = "birth_weight";
  out[6].threshold = 5;
  out[6].epsilon = Epsilon(4, 100);

  out[7].label = "faithfulness";
  out[7].type = CriterionType::kFaithfulness;
  out[7].threshold = 0.05;
  out[7].epsilon = Epsilon(1, 100);
  return out;
}

absl::Status ValidateCriteria(const std::vector<CriterionSpec>& criteria,
                              const Epsilon& epsilon_q) {
  if (criteria.empty()) return absl::InvalidArgumentError("no criteria");
  std::set<std::string> labels;
  Epsilon sum(0);
  int coefficient_criteria = 0;
  bool has_mae = false;
  bool has_abs = false;
  bool has_mean = false;
  for (const CriterionSpec& c : criteria) {
    if (c.label.empty() || !labels.insert(c.label).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("criterion label '", c.label, "' is empty or repeated"));
    }
    if (c.epsilon <= 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("criterion '", c.label, "' needs a positive epsilon"));
    }
    if (!std::isfinite(c.threshold)) {
      return absl::InvalidArgumentError(
          absl::StrCat("criterion '", c.label, "' has no finite threshold"));
    }
    sum += c.epsilon;
    switch (c.type) {
      case CriterionType::kAbsMarginal:
        has_abs = true;
        break;
      case CriterionType::kRelative1Way:
        if (!(c.lambda > 1)) {
          return absl::InvalidArgumentError(
              absl::StrCat("criterion '", c.label, "' needs lambda > 1"));
        }
        if (!(c.p > 0 && c.p <= 0.5)) {
          return absl::InvalidArgumentError(
              absl::StrCat("criterion '", c.label, "' needs 0 < p <= 1/2"));
        }
        break;
      case CriterionType::kConditionalMean:
        has_mean = true;
        if (c.column.empty()) {
          return absl::InvalidArgumentError(
              absl::StrCat("criterion '", c.label, "' needs a column"));
        }
        break;
      case CriterionType::kLrCoefficients:
        ++coefficient_criteria;
        if (c.column.empty()) {
          return absl::InvalidArgumentError(
              absl::StrCat("criterion '", c.label, "' needs a target"));
        }
        break;
      case CriterionType::kLrMae:
        has_mae = true;
        break;
      case CriterionType::kFaithfulness:
        break;
    }
  }
  if (coefficient_criteria > 1) {
    return absl::InvalidArgumentError("at most one lr_coefficients criterion");
  }
  if (has_mae && coefficient_criteria == 0) {
    return absl::InvalidArgumentError(
        "lr_mae needs an lr_coefficients criterion to supply the private fit");
  }
  if (has_mean && !has_abs) {
    return absl::InvalidArgumentError(
        "conditional means need an abs_marginal threshold for resizing");
  }
  if (sum != epsilon_q) {
    return absl::InvalidArgumentError(
        absl::StrCat("criteria epsilons sum to ", FormatEpsilon(sum),
                     ", not epsilon_q = ", FormatEpsilon(epsilon_q)));
  }
  return absl::OkStatus();
}

nlohmann::json CriterionReport::ToJson() const {
  return {{"label", label},
          {"type", CriterionTypeName(type)},
          {"mechanism", mechanism},
          {"result", noised_value},
          {"threshold", threshold},
          {"epsilon", FormatEpsilon(epsilon)},
          {"delta", delta},
          {"sigma", sigma},
          {"pass", pass},
          {"details", details}};
}

absl::StatusOr<double> AbsMarginalError(const Dataset& r, const Dataset& s) {
  if (absl::Status st = CheckComparable(r, s); !st.ok()) return st;
  if (r.empty()) return 0.0;
  const int d = r.num_columns();
  std::vector<uint64_t> width(d);
  for (int c = 0; c < d; ++c) width[c] = r.domain()[c].bins.size();
  int64_t best = 0;
  std::unordered_map<uint64_t, int64_t> gap;
  for (uint32_t mask = 1; mask < (1u << d); ++mask) {
    gap.clear();
    auto key = [&](const Record& rec) {
      uint64_t k = 0;
      for (int c = 0; c < d; ++c) {
        if (mask & (1u << c)) k = k * width[c] + static_cast<uint64_t>(rec[c]);
      }
      return k;
    };
    for (const auto& [rec, c] : r.counts()) gap[key(rec)] += c;
    for (const auto& [rec, c] : s.counts()) gap[key(rec)] -= c;
    for (const auto& [k, g] : gap) best = std::max(best, std::abs(g));
  }
  return static_cast<double>(best) / static_cast<double>(r.size());
}

std::vector<int64_t> OneWayCounts(const Dataset& d) {
  std::vector<size_t> offset(d.num_columns() + 1, 0);
  for (int c = 0; c < d.num_columns(); ++c) {
    offset[c + 1] = offset[c] + d.domain()[c].bins.size();
  }
  std::vector<int64_t> out(offset.back(), 0);
  for (const auto& [rec, n] : d.counts()) {
    for (int c = 0; c < d.num_columns(); ++c) out[offset[c] + rec[c]] += n;
  }
  return out;
}

absl::StatusOr<double> Relative1WayErrorClipped(const Dataset& r,
                                                const Dataset& s,
                                                double lambda) {
  if (absl::Status st = CheckComparable(r, s); !st.ok()) return st;
  if (!(lambda > 1)) return absl::InvalidArgumentError("lambda must exceed 1");
  std::vector<int64_t> qr = OneWayCounts(r);
  std::vector<int64_t> qs = OneWayCounts(s);
  double best = 1.0;
  for (size_t i = 0; i < qr.size(); ++i) {
    double a = qr[i] + 1.0;
    double b = qs[i] + 1.0;
    best = std::max({best, ClippedRatio(a, b, lambda), ClippedRatio(b, a, lambda)});
  }
  return best;
}

absl::StatusOr<double> Relative1WayErrorUnclipped(const Dataset& r,
                                                  const Dataset& s) {
  if (absl::Status st = CheckComparable(r, s); !st.ok()) return st;
  std::vector<int64_t> qr = OneWayCounts(r);
  std::vector<int64_t> qs = OneWayCounts(s);
  double best = 1.0;
  for (size_t i = 0; i < qr.size(); ++i) {
    double a = qr[i] + 1.0;
    double b = qs[i] + 1.0;
    best = std::max({best, a / b, b / a});
  }
  return best;
}

absl::StatusOr<double> ClippedRelativeSensitivity(double lambda, int64_t s_min,
                                                  int64_t s_max) {
  if (s_min < 0 || s_max < s_min) {
    return absl::InvalidArgumentError("need 0 <= s_min <= s_max");
  }
  if (s_max == 0 || !(lambda > 1.0 + 1.0 / static_cast<double>(s_max))) {
    return absl::InvalidArgumentError(absl::StrCat(
        "lambda ", lambda, " is not above 1 + 1/s_max with s_max = ", s_max));
  }
  const double inv = 1.0 / (static_cast<double>(s_min) + 1.0);
  return std::max(inv, lambda - 1.0 / (1.0 / lambda + inv));
}

double UnclippedRelativeSensitivity(int64_t s_max) {
  return (static_cast<double>(s_max) + 1.0) / 2.0;
}

absl::StatusOr<double> AdjustedThreshold(double lambda, double eta, double p) {
  if (!(p > 0.0) || p > 0.5) {
    return absl::InvalidArgumentError(
        absl::StrCat("tail probability ", p, " must be in (0, 1/2]"));
  }
  if (!(eta > 0.0)) return absl::InvalidArgumentError("eta must be positive");
  if (!(lambda > 1.0)) return absl::InvalidArgumentError("lambda must exceed 1");
  return lambda + eta * std::log(2.0 * p);
}

absl::StatusOr<double> ResizedMean(absl::Span<const double> values, int64_t m,
                                   double w,
                                   absl::Span<const double> priorities) {
  if (m < 1) return absl::InvalidArgumentError("resize parameter must be >= 1");
  const int64_t n = static_cast<int64_t>(values.size());
  if (m >= n) {
    double s = std::accumulate(values.begin(), values.end(), 0.0);
    return (s + static_cast<double>(m - n) * w) / static_cast<double>(m);
  }
  if (priorities.size() != values.size()) {
    return absl::InvalidArgumentError("one priority per value is required");
  }
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::nth_element(order.begin(), order.begin() + (m - 1), order.end(),
                   [&](size_t a, size_t b) {
                     return priorities[a] < priorities[b] ||
                            (priorities[a] == priorities[b] && a < b);
                   });
  double s = 0.0;
  for (int64_t i = 0; i < m; ++i) s += values[order[i]];
  return s / static_cast<double>(m);
}

absl::StatusOr<double> ResizedMean(absl::Span<const double> values, int64_t m,
                                   double w, RandomStream& rng) {
  if (m < 1) return absl::InvalidArgumentError("resize parameter must be >= 1");
  const int64_t n = static_cast<int64_t>(values.size());
  if (m >= n) return ResizedMean(values, m, w, absl::Span<const double>());
  // A uniform m-subset, as the m smallest of i.i.d. priorities would be.
  std::vector<double> pool(values.begin(), values.end());
  double s = 0.0;
  for (int64_t i = 0; i < m; ++i) {
    size_t j = i + rng.UniformInt(static_cast<uint64_t>(n - i));
    std::swap(pool[i], pool[j]);
    s += pool[i];
  }
  return s / static_cast<double>(m);
}

absl::StatusOr<ConditionalMeanResult> ConditionalMeanError(
    const Dataset& r, const Dataset& s, const std::string& column,
    const std::vector<std::string>& group_by, double t_abs,
    RandomStream& rng) {
  if (absl::Status st = CheckComparable(r, s); !st.ok()) return st;
  if (r.empty()) return absl::InvalidArgumentError("conditional mean on no data");
  const Domain& domain = r.domain();
  const int a = ColumnIndex(domain, column);
  if (a < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("averaging column '", column, "' is not in the schema"));
  }
  const ColumnSpec& acol = domain[a];
  const double n = static_cast<double>(r.size());
  ConditionalMeanResult result;
  result.min_resize = n;

  auto evaluate = [&](Group& g, int64_t m) -> absl::Status {
    const double w = g.s_count > 0 ? g.s_sum / g.s_count
                                   : 0.5 * (acol.lower_bound + acol.upper_bound);
    absl::StatusOr<double> rm = ResizedMean(g.r_values, m, w, rng);
    if (!rm.ok()) return rm.status();
    result.error = std::max(result.error, std::abs(*rm - w));
    result.min_resize = std::min(result.min_resize, static_cast<double>(m));
    ++result.groups;
    return absl::OkStatus();
  };

  // Ungrouped mean; its size n is public.
  {
    Group all;
    all.r_values.reserve(r.size());
    for (const auto& [rec, c] : r.counts()) {
      all.r_values.insert(all.r_values.end(), c, NumericValue(acol, rec[a]));
    }
    for (const auto& [rec, c] : s.counts()) {
      all.s_sum += c * NumericValue(acol, rec[a]);
      all.s_count += c;
    }
    if (absl::Status st = evaluate(all, r.size()); !st.ok()) return st;
  }

  for (const std::string& name : group_by) {
    const int b = ColumnIndex(domain, name);
    if (b < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("group-by column '", name, "' is not in the schema"));
    }
    if (domain[b].coarse_bins.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("group-by column '", name, "' has no coarse bins"));
    }
    absl::StatusOr<std::vector<BinIndex>> map =
        BinMapping(domain[b].bins, domain[b].coarse_bins);
    if (!map.ok()) return map.status();
    std::vector<Group> groups(domain[b].coarse_bins.size());
    for (const auto& [rec, c] : r.counts()) {
      auto& v = groups[(*map)[rec[b]]].r_values;
      v.insert(v.end(), c, NumericValue(acol, rec[a]));
    }
    for (const auto& [rec, c] : s.counts()) {
      Group& g = groups[(*map)[rec[b]]];
      g.s_sum += c * NumericValue(acol, rec[a]);
      g.s_count += c;
    }
    for (Group& g : groups) {
      const double estimate = static_cast<double>(g.s_count) - n * t_abs;
      const int64_t m = std::max<int64_t>(1, static_cast<int64_t>(std::floor(estimate)));
      if (absl::Status st = evaluate(g, m); !st.ok()) return st;
    }
  }
  return result;
}

double LrCoefficientError(const std::vector<double>& a,
                          const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size() && i < b.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

absl::StatusOr<double> FaithfulnessError(const Dataset& r, const Dataset& s,
                                         const MatchRules& rules) {
  if (absl::Status st = CheckComparable(r, s); !st.ok()) return st;
  absl::StatusOr<MatchPredicate> predicate =
      MatchPredicate::Bind(rules, s.domain());
  if (!predicate.ok()) return predicate.status();
  absl::StatusOr<MatchGraph> graph = BuildMatchGraph(s, r, *predicate);
  if (!graph.ok()) return graph.status();
  return 1.0 - BetaMax(*graph);
}

absl::StatusOr<std::vector<CriterionReport>> EvaluateCriteria(
    const std::vector<CriterionSpec>& criteria, const EvaluationInputs& inputs,
    NoiseSource& noise, BudgetLedger& ledger) {
  if (inputs.transformed == nullptr || inputs.candidate == nullptr) {
    return absl::InvalidArgumentError("evaluation needs both datasets");
  }
  const Dataset& r = *inputs.transformed;
  const Dataset& s = *inputs.candidate;
  if (absl::Status st = CheckComparable(r, s); !st.ok()) return st;
  if (r.empty()) return absl::InvalidArgumentError("evaluation on no data");
  const double n = static_cast<double>(r.size());

  double t_abs = -1.0;
  const CriterionSpec* coefficient_spec = nullptr;
  for (const CriterionSpec& c : criteria) {
    if (c.type == CriterionType::kAbsMarginal && t_abs < 0) t_abs = c.threshold;
    if (c.type == CriterionType::kLrCoefficients) coefficient_spec = &c;
  }

  // Private fit, shared by both regression criteria.
  std::optional<FunctionalFit> own_fit;
  const FunctionalFit* fit = inputs.regression;
  auto ensure_fit = [&]() -> absl::Status {
    if (fit != nullptr) return absl::OkStatus();
    if (coefficient_spec == nullptr) {
      return absl::InvalidArgumentError("no lr_coefficients criterion");
    }
    absl::StatusOr<FunctionalFit> f = FitFunctionalMechanism(
        r, coefficient_spec->column, coefficient_spec->epsilon,
        coefficient_spec->label, true, noise, ledger);
    if (!f.ok()) return f.status();
    own_fit = *std::move(f);
    fit = &*own_fit;
    return absl::OkStatus();
  };

  std::vector<CriterionReport> reports;
  for (const CriterionSpec& spec : criteria) {
    CriterionReport rep;
    rep.label = spec.label;
    rep.type = spec.type;
    rep.threshold = spec.threshold;
    rep.epsilon = spec.epsilon;
    rep.mechanism = "laplace";
    double value = 0.0;
    Sensitivity delta;
    std::pair<double, double> range{0.0, 1.0};

    switch (spec.type) {
      case CriterionType::kAbsMarginal: {
        absl::StatusOr<double> v = AbsMarginalError(r, s);
        if (!v.ok()) return v.status();
        value = *v;
        delta = {1.0 / n, "one record moves every marginal cell by at most 1"};
        break;
      }
      case CriterionType::kRelative1Way: {
        std::vector<int64_t> qs = OneWayCounts(s);
        const auto [lo, hi] = std::minmax_element(qs.begin(), qs.end());
        absl::StatusOr<double> d =
            ClippedRelativeSensitivity(spec.lambda, *lo, *hi);
        if (!d.ok()) return d.status();
        absl::StatusOr<double> v = Relative1WayErrorClipped(r, s, spec.lambda);
        if (!v.ok()) return v.status();
        value = *v;
        delta = {*d, "clipped relative error with s_min from the candidate"};
        range = {1.0, spec.lambda};
        absl::StatusOr<double> adjusted = AdjustedThreshold(
            spec.lambda, *d / ToDouble(spec.epsilon), spec.p);
        rep.details["s_min"] = *lo;
        rep.details["s_max"] = *hi;
        rep.details["lambda"] = spec.lambda;
        if (adjusted.ok()) rep.details["adjusted_threshold"] = *adjusted;
        break;
      }
      case CriterionType::kConditionalMean: {
        std::unique_ptr<RandomStream> rng =
            noise.Stream(absl::StrCat(spec.label, "/resize"));
        absl::StatusOr<ConditionalMeanResult> v =
            ConditionalMeanError(r, s, spec.column, spec.group_by, t_abs, *rng);
        if (!v.ok()) return v.status();
        const ColumnSpec& col = r.domain()[ColumnIndex(r.domain(), spec.column)];
        value = v->error;
        range = {col.lower_bound, col.upper_bound};
        delta = {(col.upper_bound - col.lower_bound) / v->min_resize,
                 "(U - L) / min resize parameter"};
        rep.details["min_resize"] = v->min_resize;
        rep.details["groups"] = v->groups;
        break;
      }
      case CriterionType::kLrCoefficients:
      case CriterionType::kLrMae: {
        if (absl::Status st = ensure_fit(); !st.ok()) return st;
        const std::string& target =
            spec.type == CriterionType::kLrCoefficients || spec.column.empty()
                ? coefficient_spec->column
                : spec.column;
        absl::StatusOr<RegressionDesign> design = MakeDesign(s.domain(), target);
        if (!design.ok()) return design.status();
        if (fit->target != target ||
            fit->feature_names.size() != design->features.size()) {
          return absl::InvalidArgumentError(
              "private regression fit does not match the candidate schema");
        }
        for (size_t j = 0; j < design->features.size(); ++j) {
          if (fit->feature_names[j] != s.domain()[design->features[j]].name) {
            return absl::InvalidArgumentError(
                "private regression features differ from the candidate's");
          }
        }
        Standardization st = StandardizationOf(s, *design);
        std::vector<double> w_r = ToStandardized(*fit, st);
        absl::StatusOr<std::vector<double>> w_s =
            OrdinaryLeastSquares(s, *design, st);
        if (!w_s.ok()) return w_s.status();
        if (spec.type == CriterionType::kLrCoefficients) {
          rep.mechanism = "functional";
          rep.noised_value = LrCoefficientError(w_r, *w_s);
          rep.delta = fit->sensitivity;
          rep.sigma = std::sqrt(2.0) * fit->scale;
          rep.pass = rep.noised_value < rep.threshold;
          rep.details["private_coefficients"] = w_r;
          rep.details["candidate_coefficients"] = *w_s;
          rep.details["trimmed_eigenvalues"] = fit->trimmed;
          reports.push_back(std::move(rep));
          continue;
        }
        const ColumnSpec& t = s.domain()[design->target];
        value = std::abs(ClippedMae(r, *design, st, w_r) -
                         ClippedMae(r, *design, st, *w_s));
        range = {t.lower_bound, t.upper_bound};
        delta = {2.0 * (t.upper_bound - t.lower_bound) / n, "2(U - L) / n"};
        break;
      }
      case CriterionType::kFaithfulness: {
        absl::StatusOr<double> v = FaithfulnessError(r, s, spec.match_rules);
        if (!v.ok()) return v.status();
        value = *v;
        delta = {1.0 / n, "one record changes the matching size by at most 1"};
        break;
      }
    }
    absl::StatusOr<LaplaceResult> released =
        LaplaceRelease(value, delta, spec.epsilon, spec.label, noise, ledger);
    if (!released.ok()) return released.status();
    rep.noised_value = released->value;
    rep.delta = delta.value;
    rep.sigma = released->sigma;
    rep.pass = rep.noised_value < rep.threshold;
    rep.details["range"] = {range.first, range.second};
    reports.push_back(std::move(rep));
  }
  return reports;
}

bool AllPass(const std::vector<CriterionReport>& reports) {
  return !reports.empty() &&
         std::all_of(reports.begin(), reports.end(),
                     [](const CriterionReport& r) { return r.pass; });
}

}  // namespace dpsynth
