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

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "dpsynth/config.h"
#include "dpsynth/corpus.h"
#include "dpsynth/pipeline.h"
#include "dpsynth/tuning.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dpsynth {
namespace {

using testing::ConfigDir;

nlohmann::json ConfigJson(const std::string& name) {
  std::ifstream in(ConfigDir() + "/" + name);
  std::stringstream buf;
  buf << in.rdbuf();
  return nlohmann::json::parse(buf.str());
}

absl::StatusOr<PipelineConfig> Parse(const nlohmann::json& doc) {
  return ParsePipelineConfig(doc.dump(), ConfigDir());
}

PipelineConfig DeskConfig() {
  auto config = Parse(ConfigJson("birth_desk.json"));
  testing::Require(config.status());
  return *config;
}

const Dataset& DeskCorpus() {
  static const Dataset* corpus = [] {
    CorpusOptions opt;
    opt.n = 10000;
    opt.seed = 7;
    auto d = GenerateBirthCorpus(testing::BirthSchema(), opt);
    testing::Require(d.status());
    return new Dataset(*std::move(d));
  }();
  return *corpus;
}

Dataset RawRows(const std::string& rows) {
  auto d = ParseRawCsv(
      "birth_month,mother_age,parity,gestation_week,birth_sex,birth_weight\n" +
          rows,
      testing::BirthSchema());
  testing::Require(d.status());
  return *d;
}

TEST(FilterRaw, LowWeightRemoved) {
  PipelineConfig config = DeskConfig();
  Dataset raw = RawRows("1,30,1,39,M,3300\n2,28,2,38,F,450\n");
  FilterReport report;
  auto out = FilterRaw(raw, config.raw_constraints, &report);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out->size(), 1);
  EXPECT_EQ(report.input, 2);
  EXPECT_EQ(report.removed, 1);
  EXPECT_DOUBLE_EQ(report.removed_fraction(), 0.5);
}

TEST(FilterRaw, LongGestationRemoved) {
  PipelineConfig config = DeskConfig();
  Dataset raw = RawRows("1,30,1,45,M,3300\n2,28,2,38,F,3100\n");
  auto out = FilterRaw(raw, config.raw_constraints, nullptr);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out->size(), 1);
}

TEST(FilterRaw, ValidDataUnchanged) {
  PipelineConfig config = DeskConfig();
  Dataset raw = RawRows("1,30,1,39,M,3300\n2,28,2,38,F,3100\n3,35,3,40,F,3500\n");
  FilterReport report;
  auto out = FilterRaw(raw, config.raw_constraints, &report);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(*out, raw);
  EXPECT_EQ(report.removed, 0);
}

TEST(FilterRaw, CorpusLosesLittle) {
  FilterReport report;
  auto out = FilterRaw(DeskCorpus(), DeskConfig().raw_constraints, &report);
  ASSERT_TRUE(out.ok());
  EXPECT_GT(report.removed, 0);
  EXPECT_LT(report.removed_fraction(), 0.015);
}

TEST(ExpectedTotal, DefaultBudgets) {
  PipelineConfig config = DeskConfig();
  EXPECT_EQ(FormatEpsilon(ExpectedTotal(config)), "9.98");
  config.regression.charge_outside_selection = true;
  EXPECT_EQ(FormatEpsilon(ExpectedTotal(config)), "9.55");
}

TEST(Config, ReleaseSpaceSize) {
  auto config = Parse(ConfigJson("birth_release.json"));
  ASSERT_TRUE(config.ok()) << config.status();
  ASSERT_TRUE(ValidatePipelineConfig(*config).ok());
  auto candidates = CandidateConfigurations(*config);
  ASSERT_TRUE(candidates.ok());
  EXPECT_EQ(candidates->size(), 1872u);
  std::set<std::string> ids;
  const std::regex id_form("cfg-[0-9a-f]{16}");
  for (const Configuration& c : *candidates) {
    EXPECT_TRUE(std::regex_match(c.id, id_form)) << c.id;
    EXPECT_EQ(c.id, ConfigurationId(c.canonical));
    ids.insert(c.id);
  }
  EXPECT_EQ(ids.size(), candidates->size());
}

TEST(Config, AllowListNarrows) {
  PipelineConfig config = DeskConfig();
  auto all = CandidateConfigurations(config);
  ASSERT_TRUE(all.ok());
  config.allow_list = {(*all)[0].id};
  auto narrowed = CandidateConfigurations(config);
  ASSERT_TRUE(narrowed.ok());
  EXPECT_EQ(narrowed->size(), 1u);
  config.allow_list = {"cfg-0000000000000000"};
  EXPECT_FALSE(ValidatePipelineConfig(config).ok());
}

TEST(Config, ParseErrors) {
  EXPECT_FALSE(ParsePipelineConfig("{not json", ConfigDir()).ok());
  nlohmann::json doc = ConfigJson("birth_desk.json");
  auto broken = [&](auto edit) {
    nlohmann::json d = doc;
    edit(d);
    auto c = Parse(d);
    return !c.ok() || !ValidatePipelineConfig(*c).ok();
  };
  EXPECT_TRUE(broken([](nlohmann::json& d) { d["budget"]["epsilon_x"] = "abc"; }));
  EXPECT_TRUE(broken([](nlohmann::json& d) { d["budget"]["epsilon_q"] = "0"; }));
  EXPECT_TRUE(broken([](nlohmann::json& d) {
    d["space"]["generators"][0]["family"] = "gan";
  }));
  EXPECT_TRUE(broken([](nlohmann::json& d) {
    d["space"]["transformations"]["nope"] = {"raw"};
  }));
  EXPECT_TRUE(broken([](nlohmann::json& d) { d["space"]["min_count"] = {0}; }));
  EXPECT_TRUE(broken([](nlohmann::json& d) { d["criteria"][2]["column"] = "nope"; }));
  EXPECT_TRUE(broken([](nlohmann::json& d) { d["regression"]["placement"] = "x"; }));
  EXPECT_TRUE(broken([](nlohmann::json& d) {
    d["regression"]["placement"] = "in_loop";
    d["regression"]["charge_outside_selection"] = true;
  }));
  EXPECT_TRUE(broken([](nlohmann::json& d) {
    d["selection"]["gamma"] = 0.1;
    d["selection"]["epsilon0"] = 1;
    d["selection"]["max_iterations"] = 2;
  }));
  EXPECT_FALSE(broken([](nlohmann::json&) {}));
}

TEST(RunRelease, EmptySpaceSpendsNothing) {
  nlohmann::json doc = ConfigJson("birth_desk.json");
  doc["space"]["generators"] = nlohmann::json::array();
  auto config = Parse(doc);
  auto noise = NoiseSource::ForTesting(1);
  if (config.ok()) {
    auto out = RunRelease(DeskCorpus(), *config, *noise);
    EXPECT_FALSE(out.ok());
    EXPECT_EQ(out.status().code(), absl::StatusCode::kInvalidArgument);
  }
  EXPECT_EQ(noise->draws(), 0u);
}

TEST(RunRelease, DeskRunProducesValidBundle) {
  PipelineConfig config = DeskConfig();
  auto noise = NoiseSource::ForTesting(1);
  std::ostringstream audit, access;
  auto out = RunRelease(DeskCorpus(), config, *noise, {&audit, &access});
  ASSERT_TRUE(out.ok()) << out.status();
  ASSERT_TRUE(out->bundle.has_value()) << audit.str();
  const ReleaseBundle& b = *out->bundle;
  EXPECT_EQ(b.released.size(), out->n);
  EXPECT_GE(b.released.MinCount(), 2);
  EXPECT_EQ(b.reports.size(), 8u);
  for (const CriterionReport& r : b.reports) EXPECT_TRUE(r.pass) << r.label;
  EXPECT_EQ(FormatEpsilon(out->ledger.Total()), "9.98");
  EXPECT_EQ(out->ledger.selection_factor(), 2);
  for (const LedgerEntry& e : out->ledger.entries()) {
    EXPECT_EQ(e.label.find("projection"), std::string::npos);
  }
  EXPECT_EQ(out->n, DeskCorpus().size() - out->filter.removed);
  // Every read of the original names its purpose.
  std::istringstream lines(access.str());
  std::string line;
  int reads = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(line.rfind("transform purpose=", 0), 0u) << line;
    ++reads;
  }
  EXPECT_GE(reads, 1);
  EXPECT_NE(audit.str().find("stop=accepted"), std::string::npos);
}

TEST(RunRelease, ReplayIsBitReproducible) {
  PipelineConfig config = DeskConfig();
  MemoryTranscript transcript;
  auto first_noise = NoiseSource::ForTesting(3, &transcript);
  auto first = RunRelease(DeskCorpus(), config, *first_noise);
  ASSERT_TRUE(first.ok());

  NoiseOptions options;
  options.mode = NoiseMode::kReplay;
  options.production = false;
  options.replay = transcript.entries();
  auto replay_noise = NoiseSource::Create(options, nullptr);
  ASSERT_TRUE(replay_noise.ok());
  auto second = RunRelease(DeskCorpus(), config, **replay_noise);
  ASSERT_TRUE(second.ok()) << second.status();
  ASSERT_EQ(first->bundle.has_value(), second->bundle.has_value());
  EXPECT_EQ(MetricsJson(*first, config).dump(), MetricsJson(*second, config).dump());
  if (first->bundle.has_value()) {
    EXPECT_EQ(first->bundle->released, second->bundle->released);
  }
}

TEST(RunRelease, ImpossibleThresholdReleasesNothing) {
  nlohmann::json doc = ConfigJson("birth_desk.json");
  doc["criteria"][0]["threshold"] = -1000;
  doc["selection"]["operational_cap"] = 3;
  auto config = Parse(doc);
  ASSERT_TRUE(config.ok());
  auto noise = NoiseSource::ForTesting(4);
  auto out = RunRelease(DeskCorpus(), *config, *noise);
  ASSERT_TRUE(out.ok()) << out.status();
  EXPECT_FALSE(out->bundle.has_value());
  EXPECT_EQ(out->reason, StopReason::kOperationalCap);
  // The budget is spent regardless.
  EXPECT_EQ(FormatEpsilon(out->ledger.Total()), "9.98");
  nlohmann::json metrics = MetricsJson(*out, *config);
  EXPECT_FALSE(metrics["released"].get<bool>());
  EXPECT_FALSE(metrics.contains("criteria"));
  EXPECT_NE(FormatMetricsTable(metrics).find("no release"), std::string::npos);
}

TEST(MetricsJson, PublicKeysOnly) {
  PipelineConfig config = DeskConfig();
  auto noise = NoiseSource::ForTesting(1);
  auto out = RunRelease(DeskCorpus(), config, *noise);
  ASSERT_TRUE(out.ok());
  nlohmann::json m = MetricsJson(*out, config);
  std::set<std::string> keys;
  for (auto it = m.begin(); it != m.end(); ++it) keys.insert(it.key());
  EXPECT_EQ(keys, (std::set<std::string>{"released", "n", "budget",
                                         "configuration", "criteria"}));
  EXPECT_EQ(m["budget"]["epsilon_total"], "9.98");
  EXPECT_EQ(m["criteria"].size(), 8u);
  for (const auto& c : m["criteria"]) {
    for (const char* k : {"label", "result", "threshold", "epsilon", "mechanism",
                          "delta", "sigma", "pass"}) {
      EXPECT_TRUE(c.contains(k)) << k;
    }
  }
  const std::string table = FormatMetricsTable(m);
  EXPECT_NE(table.find("faithfulness"), std::string::npos);
  EXPECT_NE(table.find("total epsilon = 9.98"), std::string::npos);
}

TEST(TuneOnPublic, AlwaysFailingConfigExcluded) {
  TuneOptions opt;
  opt.trials_per_config = 4;
  opt.threads = 2;
  auto good = TuneOnPublic(DeskCorpus(), DeskConfig(), opt);
  ASSERT_TRUE(good.ok()) << good.status();
  ASSERT_EQ(good->size(), 1u);
  EXPECT_GT((*good)[0].estimate.passes, 0);
  EXPECT_TRUE((*good)[0].allowed);

  nlohmann::json doc = ConfigJson("birth_desk.json");
  doc["criteria"][7]["threshold"] = -1;
  auto failing = Parse(doc);
  ASSERT_TRUE(failing.ok());
  auto bad = TuneOnPublic(DeskCorpus(), *failing, opt);
  ASSERT_TRUE(bad.ok());
  EXPECT_EQ((*bad)[0].estimate.passes, 0);
  EXPECT_FALSE((*bad)[0].allowed);
  nlohmann::json report = TuneReportJson(*bad, opt);
  EXPECT_TRUE(report["allow_list"].empty());
}

}  // namespace
}  // namespace dpsynth
