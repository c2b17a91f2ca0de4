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

#include "dpsynth/tuning.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "dpsynth/pipeline.h"

namespace dpsynth {
namespace {

uint64_t SplitMix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::pair<double, double> WilsonInterval(int64_t successes, int64_t trials,
                                         double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = successes / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half =
      z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<PassRate> EstimatePassRates(size_t count, const TuneOptions& options,
                                        const TrialFn& trial) {
  std::vector<PassRate> rates(count);
  const uint64_t total = count * static_cast<uint64_t>(options.trials_per_config);
  std::atomic<uint64_t> next{0};
  std::mutex mu;
  auto worker = [&]() {
    for (uint64_t task = next++; task < total; task = next++) {
      const size_t index = task / options.trials_per_config;
      const uint64_t seed = SplitMix(options.seed ^ SplitMix(task));
      absl::StatusOr<bool> pass = trial(index, seed);
      std::lock_guard<std::mutex> lock(mu);
      PassRate& r = rates[index];
      ++r.trials;
      if (!pass.ok()) {
        ++r.errors;
      } else if (*pass) {
        ++r.passes;
      }
    }
  };
  const int threads = std::max(1, options.threads);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (PassRate& r : rates) {
    r.rate = r.trials > 0 ? static_cast<double>(r.passes) / r.trials : 0.0;
    std::tie(r.ci_low, r.ci_high) = WilsonInterval(r.passes, r.trials, options.z);
  }
  return rates;
}

absl::StatusOr<std::vector<TuneResult>> TuneOnPublic(
    const Dataset& public_raw, const PipelineConfig& config,
    const TuneOptions& options) {
  if (options.trials_per_config < 1) {
    return absl::InvalidArgumentError("trials_per_config must be at least 1");
  }
  PipelineConfig local = config;
  local.allow_list.clear();
  local.regression.placement = RegressionPlacement::kInLoop;
  local.regression.charge_outside_selection = false;
  if (absl::Status s = ValidatePipelineConfig(local); !s.ok()) return s;
  absl::StatusOr<std::vector<Configuration>> configs =
      CandidateConfigurations(local);
  if (!configs.ok()) return configs.status();

  FilterReport report;
  absl::StatusOr<Dataset> filtered =
      FilterRaw(public_raw, local.raw_constraints, &report);
  if (!filtered.ok()) return filtered.status();
  const ProtectedDataset data(*std::move(filtered), &local.schema, nullptr);

  std::vector<PassRate> rates = EstimatePassRates(
      configs->size(), options,
      [&](size_t index, uint64_t seed) -> absl::StatusOr<bool> {
        std::unique_ptr<NoiseSource> noise = NoiseSource::ForTesting(seed);
        BudgetLedger ledger;
        absl::StatusOr<TrialOutput> out =
            RunTrial(data, (*configs)[index], local, nullptr, *noise, ledger);
        if (!out.ok()) return out.status();
        return out->pass;
      });

  std::vector<TuneResult> results;
  for (size_t i = 0; i < configs->size(); ++i) {
    TuneResult r;
    r.configuration = (*configs)[i];
    r.estimate = rates[i];
    r.allowed = rates[i].rate >= options.floor;
    results.push_back(std::move(r));
  }
  return results;
}

nlohmann::json TuneReportJson(const std::vector<TuneResult>& results,
                              const TuneOptions& options) {
  nlohmann::json allow = nlohmann::json::array();
  nlohmann::json rows = nlohmann::json::array();
  for (const TuneResult& r : results) {
    if (r.allowed) allow.push_back(r.configuration.id);
    rows.push_back({{"id", r.configuration.id},
                    {"configuration", r.configuration.canonical},
                    {"trials", r.estimate.trials},
                    {"passes", r.estimate.passes},
                    {"errors", r.estimate.errors},
                    {"pass_rate", r.estimate.rate},
                    {"ci", {r.estimate.ci_low, r.estimate.ci_high}},
                    {"allowed", r.allowed}});
  }
  return {{"floor", options.floor},
          {"trials_per_config", options.trials_per_config},
          {"allow_list", allow},
          {"configurations", rows}};
}

}  // namespace dpsynth
