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

#include "dpsynth/config.h"

#include <sodium.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace dpsynth {
namespace {

using nlohmann::json;

absl::Status Invalid(const std::string& what) {
  return absl::InvalidArgumentError(absl::StrCat("config: ", what));
}

// Budgets are exact decimals; strings are preferred so that no binary
// rounding happens before parsing.
absl::StatusOr<Epsilon> EpsilonField(const json& j, const std::string& name) {
  if (j.is_string()) return ParseEpsilon(j.get<std::string>());
  if (j.is_number()) return EpsilonFromDouble(j.get<double>());
  return Invalid(absl::StrCat(name, " must be a decimal string or number"));
}

absl::StatusOr<std::vector<Constraint>> ParseConstraints(const json& list) {
  std::vector<Constraint> out;
  for (const json& c : list) {
    Constraint con;
    con.name = c.at("name").get<std::string>();
    for (const json& a : c.at("atoms")) {
      Atom atom;
      atom.column = a.at("column").get<std::string>();
      const std::string op = a.at("op").get<std::string>();
      if (op == "<") {
        atom.comparison = Comparison::kLess;
      } else if (op == ">") {
        atom.comparison = Comparison::kGreater;
      } else {
        return Invalid(absl::StrCat("constraint op '", op, "' is not < or >"));
      }
      atom.threshold = a.at("threshold").get<double>();
      con.atoms.push_back(std::move(atom));
    }
    out.push_back(std::move(con));
  }
  return out;
}

absl::StatusOr<CriterionSpec> ParseCriterion(const json& c) {
  CriterionSpec spec;
  spec.label = c.at("label").get<std::string>();
  absl::StatusOr<CriterionType> type =
      ParseCriterionType(c.at("type").get<std::string>());
  if (!type.ok()) return type.status();
  spec.type = *type;
  spec.threshold = c.at("threshold").get<double>();
  absl::StatusOr<Epsilon> eps = EpsilonField(c.at("epsilon"), spec.label);
  if (!eps.ok()) return eps.status();
  spec.epsilon = *eps;
  spec.lambda = c.value("lambda", spec.lambda);
  spec.p = c.value("p", spec.p);
  spec.column = c.value("column", std::string());
  if (c.contains("group_by")) {
    spec.group_by = c["group_by"].get<std::vector<std::string>>();
  }
  if (c.contains("match")) {
    const json& m = c["match"];
    spec.match_rules.tolerant_columns =
        m.value("tolerant", std::vector<std::string>());
    spec.match_rules.exact_if_strictly_inside =
        m.value("exact_if_strictly_inside",
                std::map<std::string, std::vector<double>>());
  }
  return spec;
}

absl::StatusOr<PipelineConfig> ParseDocument(const json& doc,
                                             const std::string& base_dir) {
  PipelineConfig cfg;
  cfg.source = doc;

  const json& schema = doc.at("schema");
  if (schema.is_string()) {
    std::filesystem::path p(schema.get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    absl::StatusOr<Schema> s = LoadSchema(p.string());
    if (!s.ok()) return s.status();
    cfg.schema = *std::move(s);
  } else {
    absl::StatusOr<Schema> s = ParseSchemaJson(schema.dump());
    if (!s.ok()) return s.status();
    cfg.schema = *std::move(s);
  }

  const json& budget = doc.at("budget");
  absl::StatusOr<Epsilon> ex = EpsilonField(budget.at("epsilon_x"), "epsilon_x");
  if (!ex.ok()) return ex.status();
  absl::StatusOr<Epsilon> eq = EpsilonField(budget.at("epsilon_q"), "epsilon_q");
  if (!eq.ok()) return eq.status();
  cfg.epsilon_x = *ex;
  cfg.epsilon_q = *eq;

  if (doc.contains("criteria")) {
    for (const json& c : doc["criteria"]) {
      absl::StatusOr<CriterionSpec> spec = ParseCriterion(c);
      if (!spec.ok()) return spec.status();
      cfg.criteria.push_back(*std::move(spec));
    }
  } else {
    cfg.criteria = DefaultCriteria();
  }

  const json& space = doc.at("space");
  if (space.contains("transformations")) {
    cfg.space.transformations =
        space["transformations"]
            .get<std::map<std::string, std::vector<std::string>>>();
  }
  for (const json& g : space.at("generators")) {
    GeneratorGrid grid;
    absl::StatusOr<Family> family = ParseFamily(g.at("family").get<std::string>());
    if (!family.ok()) return family.status();
    grid.family = *family;
    grid.grid = g.contains("grid") ? g["grid"].get<HyperparameterGrid>()
                                   : DefaultGrid(grid.family);
    cfg.space.generators.push_back(std::move(grid));
  }
  cfg.space.min_counts =
      space.value("min_count", std::vector<int64_t>{2, 3});

  cfg.allow_list = doc.value("allow_list", std::vector<std::string>());

  if (doc.contains("selection")) {
    const json& s = doc["selection"];
    cfg.selection.tau = s.value("tau", cfg.selection.tau);
    cfg.selection.gamma = s.value("gamma", cfg.selection.gamma);
    cfg.selection.epsilon0 = s.value("epsilon0", cfg.selection.epsilon0);
    if (s.contains("max_iterations") && !s["max_iterations"].is_null()) {
      cfg.selection.max_iterations = s["max_iterations"].get<int64_t>();
    }
    cfg.selection.operational_cap =
        s.value("operational_cap", cfg.selection.operational_cap);
    cfg.selection.wall_clock_seconds =
        s.value("wall_clock_seconds", cfg.selection.wall_clock_seconds);
  }
  if (doc.contains("projection")) {
    absl::StatusOr<ProjectionAlgorithm> alg = ParseProjectionAlgorithm(
        doc["projection"].value("algorithm", std::string("primary")));
    if (!alg.ok()) return alg.status();
    cfg.projection = *alg;
  }
  if (doc.contains("regression")) {
    const json& r = doc["regression"];
    const std::string placement = r.value("placement", std::string("pre_loop"));
    if (placement == "pre_loop") {
      cfg.regression.placement = RegressionPlacement::kPreLoop;
    } else if (placement == "in_loop") {
      cfg.regression.placement = RegressionPlacement::kInLoop;
    } else {
      return Invalid(absl::StrCat("regression placement '", placement,
                                  "' is not pre_loop or in_loop"));
    }
    cfg.regression.charge_outside_selection =
        r.value("charge_outside_selection", false);
  }
  if (doc.contains("sampling")) {
    const json& s = doc["sampling"];
    cfg.sampling.acceptance_floor =
        s.value("acceptance_floor", cfg.sampling.acceptance_floor);
    cfg.sampling.window = s.value("window", cfg.sampling.window);
  }
  cfg.raw_constraints = DefaultRawConstraints();
  cfg.synthetic_constraints = DefaultSyntheticConstraints();
  if (doc.contains("constraints")) {
    const json& c = doc["constraints"];
    if (c.contains("raw")) {
      absl::StatusOr<std::vector<Constraint>> raw = ParseConstraints(c["raw"]);
      if (!raw.ok()) return raw.status();
      cfg.raw_constraints = *std::move(raw);
    }
    if (c.contains("synthetic")) {
      absl::StatusOr<std::vector<Constraint>> syn =
          ParseConstraints(c["synthetic"]);
      if (!syn.ok()) return syn.status();
      cfg.synthetic_constraints = *std::move(syn);
    }
  }
  return cfg;
}

}  // namespace

std::string CanonicalConfiguration(const Schema& schema,
                                   const TransformPlan& plan,
                                   const GeneratorSpec& generator,
                                   int64_t min_count) {
  std::vector<std::string> parts;
  for (size_t c = 0; c < schema.columns.size(); ++c) {
    parts.push_back(
        absl::StrCat(schema.columns[c].name, "=", plan.alternatives[c]));
  }
  return absl::StrCat("transform(", absl::StrJoin(parts, ","), ");",
                      generator.CanonicalString(), ";min_count=", min_count);
}

std::string ConfigurationId(const std::string& canonical) {
  unsigned char hash[8];
  crypto_generichash(hash, sizeof(hash),
                     reinterpret_cast<const unsigned char*>(canonical.data()),
                     canonical.size(), nullptr, 0);
  char hex[2 * sizeof(hash) + 1];
  sodium_bin2hex(hex, sizeof(hex), hash, sizeof(hash));
  return absl::StrCat("cfg-", hex);
}

absl::StatusOr<std::vector<Configuration>> EnumerateConfigurations(
    const Schema& schema, const ConfigurationSpace& space,
    const Epsilon& epsilon_x) {
  std::vector<std::vector<std::string>> choices;
  for (const ColumnDefinition& col : schema.columns) {
    auto it = space.transformations.find(col.name);
    if (it == space.transformations.end() || it->second.empty()) {
      choices.push_back({kRawAlternative});
    } else {
      choices.push_back(it->second);
    }
  }
  for (const auto& [name, alts] : space.transformations) {
    if (schema.Index(name) < 0) {
      return Invalid(absl::StrCat("transformation for unknown column '", name, "'"));
    }
  }
  std::vector<TransformPlan> plans;
  std::vector<size_t> idx(choices.size(), 0);
  while (true) {
    TransformPlan plan;
    for (size_t c = 0; c < choices.size(); ++c) {
      plan.alternatives.push_back(choices[c][idx[c]]);
    }
    if (absl::Status s = plan.Validate(schema); !s.ok()) return s;
    plans.push_back(std::move(plan));
    size_t c = 0;
    for (; c < choices.size(); ++c) {
      if (++idx[c] < choices[c].size()) break;
      idx[c] = 0;
    }
    if (c == choices.size()) break;
  }

  std::vector<GeneratorSpec> generators;
  for (const GeneratorGrid& g : space.generators) {
    std::vector<GeneratorSpec> specs = ExpandGrid(g.family, g.grid, epsilon_x);
    generators.insert(generators.end(), specs.begin(), specs.end());
  }
  for (int64_t m : space.min_counts) {
    if (m < 1) return Invalid("min_count values must be at least 1");
  }

  std::vector<Configuration> out;
  std::set<std::string> seen;
  for (const TransformPlan& plan : plans) {
    for (const GeneratorSpec& gen : generators) {
      for (int64_t m : space.min_counts) {
        Configuration cfg{plan, gen, m, "", ""};
        cfg.canonical = CanonicalConfiguration(schema, plan, gen, m);
        cfg.id = ConfigurationId(cfg.canonical);
        if (seen.insert(cfg.id).second) out.push_back(std::move(cfg));
      }
    }
  }
  return out;
}

absl::StatusOr<PipelineConfig> ParsePipelineConfig(const std::string& text,
                                                   const std::string& base_dir) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) return Invalid("not valid JSON");
  try {
    return ParseDocument(doc, base_dir);
  } catch (const json::exception& e) {
    return Invalid(e.what());
  }
}

absl::StatusOr<PipelineConfig> LoadPipelineConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  std::string dir = std::filesystem::path(path).parent_path().string();
  return ParsePipelineConfig(buf.str(), dir.empty() ? "." : dir);
}

absl::Status ValidatePipelineConfig(const PipelineConfig& config) {
  if (absl::Status s = config.schema.Validate(); !s.ok()) return s;
  if (config.epsilon_x <= 0 || config.epsilon_q <= 0) {
    return Invalid("epsilon_x and epsilon_q must be positive");
  }
  if (absl::Status s = ValidateCriteria(config.criteria, config.epsilon_q);
      !s.ok()) {
    return s;
  }
  if (absl::Status s = ValidateSelectionParams(config.selection); !s.ok()) {
    return s;
  }
  if (config.sampling.window < 1 || config.sampling.acceptance_floor < 0 ||
      config.sampling.acceptance_floor >= 1) {
    return Invalid("sampling needs window >= 1 and floor in [0, 1)");
  }
  std::shared_ptr<const Domain> raw = config.schema.RawDomain();
  if (absl::StatusOr<ConstraintSet> set =
          ConstraintSet::Bind(config.raw_constraints, *raw, true);
      !set.ok()) {
    return set.status();
  }
  if (config.regression.charge_outside_selection &&
      config.regression.placement != RegressionPlacement::kPreLoop) {
    return Invalid("charge_outside_selection needs the pre_loop placement");
  }
  for (const CriterionSpec& c : config.criteria) {
    if (!c.column.empty() && config.schema.Index(c.column) < 0) {
      return Invalid(absl::StrCat("criterion '", c.label, "' names unknown column '",
                                  c.column, "'"));
    }
    for (const std::string& b : c.group_by) {
      if (config.schema.Index(b) < 0) {
        return Invalid(absl::StrCat("criterion '", c.label,
                                    "' groups by unknown column '", b, "'"));
      }
    }
  }
  absl::StatusOr<std::vector<Configuration>> candidates =
      CandidateConfigurations(config);
  if (!candidates.ok()) return candidates.status();
  if (candidates->empty()) return Invalid("the configuration space is empty");
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Configuration>> CandidateConfigurations(
    const PipelineConfig& config) {
  absl::StatusOr<std::vector<Configuration>> all =
      EnumerateConfigurations(config.schema, config.space, config.epsilon_x);
  if (!all.ok() || config.allow_list.empty()) return all;
  std::set<std::string> allowed(config.allow_list.begin(),
                                config.allow_list.end());
  std::vector<Configuration> out;
  for (Configuration& c : *all) {
    if (allowed.erase(c.id) > 0) out.push_back(std::move(c));
  }
  if (!allowed.empty()) {
    return Invalid(absl::StrCat("allow-list id ", *allowed.begin(),
                                " is not in the configuration space"));
  }
  return out;
}

}  // namespace dpsynth
