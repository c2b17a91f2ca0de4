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

// dpsynth: release, tune, validate-config, report, corpus.
//
// Exit codes: 0 success, 1 no release, 2 configuration error, 3 other error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "dpsynth/config.h"
#include "dpsynth/corpus.h"
#include "dpsynth/pipeline.h"
#include "dpsynth/tuning.h"

namespace {

constexpr int kOk = 0;
constexpr int kNoRelease = 1;
constexpr int kConfigError = 2;
constexpr int kOtherError = 3;

int Fail(const absl::Status& status) {
  std::cerr << "dpsynth: " << status << "\n";
  return status.code() == absl::StatusCode::kInvalidArgument ||
                 status.code() == absl::StatusCode::kNotFound
             ? kConfigError
             : kOtherError;
}

bool WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

absl::StatusOr<std::string> ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct ReleaseArgs {
  std::string config;
  std::string data;
  std::string out_dir;
  std::string private_dir;
  bool insecure_seeded = false;
  uint64_t seed = 0;
  std::string replay;
};

int Release(const ReleaseArgs& args) {
  absl::StatusOr<dpsynth::PipelineConfig> config =
      dpsynth::LoadPipelineConfig(args.config);
  if (!config.ok()) return Fail(config.status());
  if (absl::Status s = dpsynth::ValidatePipelineConfig(*config); !s.ok()) {
    return Fail(s);
  }
  absl::StatusOr<dpsynth::Dataset> raw =
      dpsynth::ReadRawCsv(args.data, config->schema);
  if (!raw.ok()) return Fail(raw.status());

  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  std::filesystem::create_directories(args.private_dir, ec);
  const std::filesystem::path priv(args.private_dir);
  const std::filesystem::path out(args.out_dir);

  dpsynth::NoiseOptions options;
  if (!args.replay.empty()) {
    absl::StatusOr<std::vector<dpsynth::TranscriptEntry>> t =
        dpsynth::ReadTranscript(args.replay);
    if (!t.ok()) return Fail(t.status());
    options.mode = dpsynth::NoiseMode::kReplay;
    options.replay = *std::move(t);
    options.production = false;
  } else if (args.insecure_seeded) {
    options.mode = dpsynth::NoiseMode::kSeeded;
    options.seed = args.seed;
    options.production = false;
  }
  absl::StatusOr<std::unique_ptr<dpsynth::FileTranscript>> transcript =
      dpsynth::FileTranscript::Open((priv / "transcript.jsonl").string());
  if (!transcript.ok()) return Fail(transcript.status());
  absl::StatusOr<std::unique_ptr<dpsynth::NoiseSource>> noise =
      dpsynth::NoiseSource::Create(std::move(options), transcript->get());
  if (!noise.ok()) return Fail(noise.status());

  std::ofstream audit(priv / "audit.log");
  std::ofstream access(priv / "access.log");
  absl::StatusOr<dpsynth::ReleaseOutcome> outcome =
      dpsynth::RunRelease(*raw, *config, **noise, {&audit, &access});
  if (!outcome.ok()) return Fail(outcome.status());

  const nlohmann::json metrics = dpsynth::MetricsJson(*outcome, *config);
  if (!WriteText((out / "metrics.json").string(), metrics.dump(2) + "\n") ||
      !WriteText((out / "config.json").string(),
                 config->source.dump(2) + "\n")) {
    return Fail(absl::InternalError("cannot write the public report"));
  }
  if (!outcome->bundle.has_value()) {
    std::cerr << "dpsynth: no release ("
              << dpsynth::StopReasonName(outcome->reason)
              << "); the privacy budget was spent but nothing is published\n";
    return kNoRelease;
  }
  if (absl::Status s = dpsynth::WriteLabelCsv(
          outcome->bundle->released, (out / "released.csv").string());
      !s.ok()) {
    return Fail(s);
  }
  WriteText((priv / "model.json").string(),
            outcome->bundle->model.dump(2) + "\n");
  std::cout << dpsynth::FormatMetricsTable(metrics);
  return kOk;
}

struct TuneArgs {
  std::string config;
  std::string data;
  std::string out;
  dpsynth::TuneOptions options;
};

int Tune(const TuneArgs& args) {
  absl::StatusOr<dpsynth::PipelineConfig> config =
      dpsynth::LoadPipelineConfig(args.config);
  if (!config.ok()) return Fail(config.status());
  absl::StatusOr<dpsynth::Dataset> data =
      dpsynth::ReadRawCsv(args.data, config->schema);
  if (!data.ok()) return Fail(data.status());
  absl::StatusOr<std::vector<dpsynth::TuneResult>> results =
      dpsynth::TuneOnPublic(*data, *config, args.options);
  if (!results.ok()) return Fail(results.status());
  const nlohmann::json report = dpsynth::TuneReportJson(*results, args.options);
  if (args.out.empty()) {
    std::cout << report.dump(2) << "\n";
  } else if (!WriteText(args.out, report.dump(2) + "\n")) {
    return Fail(absl::InternalError("cannot write " + args.out));
  }
  std::cerr << report["allow_list"].size() << " of " << results->size()
            << " configurations reach the floor " << args.options.floor << "\n";
  return kOk;
}

int ValidateConfig(const std::string& path) {
  absl::StatusOr<dpsynth::PipelineConfig> config =
      dpsynth::LoadPipelineConfig(path);
  if (!config.ok()) return Fail(config.status());
  if (absl::Status s = dpsynth::ValidatePipelineConfig(*config); !s.ok()) {
    return Fail(s);
  }
  absl::StatusOr<std::vector<dpsynth::Configuration>> candidates =
      dpsynth::CandidateConfigurations(*config);
  if (!candidates.ok()) return Fail(candidates.status());
  std::cout << "ok: " << candidates->size() << " configurations, "
            << config->criteria.size() << " criteria, epsilon_x = "
            << dpsynth::FormatEpsilon(config->epsilon_x)
            << ", epsilon_q = " << dpsynth::FormatEpsilon(config->epsilon_q)
            << ", total = "
            << dpsynth::FormatEpsilon(dpsynth::ExpectedTotal(*config)) << "\n";
  return kOk;
}

int Report(const std::string& path, bool json) {
  absl::StatusOr<std::string> text = ReadText(path);
  if (!text.ok()) return Fail(text.status());
  nlohmann::json metrics = nlohmann::json::parse(*text, nullptr, false);
  if (metrics.is_discarded() || !metrics.is_object() ||
      !metrics.contains("budget")) {
    return Fail(absl::InvalidArgumentError(path + " is not a metrics report"));
  }
  if (json) {
    std::cout << metrics.dump(2) << "\n";
  } else {
    std::cout << dpsynth::FormatMetricsTable(metrics);
  }
  return metrics.value("released", false) ? kOk : kNoRelease;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthetic microdata release"};
  app.require_subcommand(1);

  ReleaseArgs release;
  CLI::App* rel = app.add_subcommand("release", "Run a private release");
  rel->add_option("--config", release.config, "Pipeline config (JSON)")
      ->required();
  rel->add_option("--data", release.data, "Original data CSV")->required();
  rel->add_option("--out", release.out_dir, "Public output directory")
      ->required();
  rel->add_option("--private-dir", release.private_dir,
                  "Directory for the audit log, noise transcript and model")
      ->required();
  rel->add_flag("--insecure-seeded", release.insecure_seeded,
                "Use seeded randomness (testing only; not private)");
  rel->add_option("--seed", release.seed, "Seed for --insecure-seeded");
  rel->add_option("--replay", release.replay,
                  "Replay a recorded noise transcript");

  TuneArgs tune;
  CLI::App* tn = app.add_subcommand("tune", "Estimate pass rates on public data");
  tn->add_option("--config", tune.config, "Pipeline config (JSON)")->required();
  tn->add_option("--data", tune.data, "Public data CSV")->required();
  tn->add_option("--out", tune.out, "Write the tuning report here");
  tn->add_option("--trials", tune.options.trials_per_config,
                 "Trials per configuration");
  tn->add_option("--floor", tune.options.floor, "Pass-rate floor");
  tn->add_option("--threads", tune.options.threads, "Worker threads");
  tn->add_option("--seed", tune.options.seed, "Base seed");

  std::string validate_path;
  CLI::App* val = app.add_subcommand("validate-config", "Check a config file");
  val->add_option("--config", validate_path, "Pipeline config (JSON)")
      ->required();

  std::string report_path;
  bool report_json = false;
  CLI::App* rep = app.add_subcommand("report", "Print a metrics report");
  rep->add_option("--metrics", report_path, "metrics.json of a release")
      ->required();
  rep->add_flag("--json", report_json, "Print JSON instead of a table");

  dpsynth::CorpusOptions corpus;
  std::string corpus_out;
  CLI::App* cor =
      app.add_subcommand("corpus", "Write a synthetic birth-like public CSV");
  cor->add_option("--n", corpus.n, "Rows");
  cor->add_option("--seed", corpus.seed, "Seed");
  cor->add_option("--out", corpus_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (rel->parsed()) return Release(release);
  if (tn->parsed()) return Tune(tune);
  if (val->parsed()) return ValidateConfig(validate_path);
  if (rep->parsed()) return Report(report_path, report_json);
  if (cor->parsed()) {
    if (!WriteText(corpus_out, dpsynth::GenerateBirthCorpusCsv(corpus))) {
      return Fail(absl::InternalError("cannot write " + corpus_out));
    }
    return kOk;
  }
  return kConfigError;
}
