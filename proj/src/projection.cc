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

#include "dpsynth/projection.h"

#include <utility>
#include <vector>

#include "absl/strings/str_cat.h"

namespace dpsynth {
namespace {

// Moves a uniformly random subset of `size` elements to the front.
void SampleInPlace(std::vector<Record>& items, size_t size, RandomStream& rng) {
  for (size_t i = 0; i < size && i < items.size(); ++i) {
    size_t j = i + rng.UniformInt(items.size() - i);
    std::swap(items[i], items[j]);
  }
}

absl::Status RestoreSize(Dataset& out, int64_t target,
                         const std::vector<Record>& promoted, int64_t m,
                         RandomStream& rng, ProjectionReport* report) {
  int64_t deficit = target - out.size();
  if (deficit <= 0) return absl::OkStatus();
  std::vector<Record> pool = promoted;
  if (pool.empty()) {
    for (const auto& [r, c] : out.counts()) {
      if (c >= m) pool.push_back(r);
    }
  }
  if (pool.empty()) {
    return absl::FailedPreconditionError(
        "projection removed every record; size cannot be restored");
  }
  for (int64_t i = 0; i < deficit; ++i) {
    const Record& r = pool[rng.UniformInt(pool.size())];
    if (absl::Status s = out.Add(r); !s.ok()) return s;
  }
  if (report != nullptr) report->duplicated = deficit;
  return absl::OkStatus();
}

absl::Status CheckM(int64_t m) {
  if (m < 1) return absl::InvalidArgumentError("min_count must be at least 1");
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<ProjectionAlgorithm> ParseProjectionAlgorithm(
    const std::string& name) {
  if (name == "primary") return ProjectionAlgorithm::kPrimary;
  if (name == "legacy") return ProjectionAlgorithm::kLegacy;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown projection algorithm '", name, "'"));
}

absl::StatusOr<Dataset> ProjectMinOccurrence(const Dataset& data, int64_t m,
                                             RandomStream& rng,
                                             ProjectionReport* report,
                                             bool restore_size) {
  if (absl::Status s = CheckM(m); !s.ok()) return s;
  ProjectionReport local;
  Dataset out(data.shared_domain());
  std::map<int64_t, std::vector<Record>> by_count;
  for (const auto& [r, c] : data.counts()) {
    if (c >= m) {
      if (absl::Status s = out.Add(r, c); !s.ok()) return s;
    } else {
      by_count[c].push_back(r);
    }
  }
  std::vector<Record> promoted;
  for (auto& [k, records] : by_count) {
    const int64_t n_k = static_cast<int64_t>(records.size());
    const int64_t keep = (k * n_k) / m;
    SampleInPlace(records, keep, rng);
    for (int64_t i = 0; i < keep; ++i) {
      if (absl::Status s = out.Add(records[i], m); !s.ok()) return s;
      promoted.push_back(records[i]);
    }
    local.promoted += keep;
    local.dropped += n_k - keep;
    local.mass_by_count[k] = {k * n_k, m * keep};
  }
  if (restore_size) {
    if (absl::Status s = RestoreSize(out, data.size(), promoted, m, rng, &local);
        !s.ok()) {
      return s;
    }
  }
  if (report != nullptr) *report = std::move(local);
  return out;
}

absl::StatusOr<Dataset> ProjectMinOccurrenceLegacy(const Dataset& data,
                                                   int64_t m, RandomStream& rng,
                                                   ProjectionReport* report,
                                                   bool restore_size) {
  if (absl::Status s = CheckM(m); !s.ok()) return s;
  ProjectionReport local;
  Dataset out(data.shared_domain());
  std::map<int64_t, std::vector<Record>> by_count;
  int64_t low_distinct = 0;
  for (const auto& [r, c] : data.counts()) {
    if (c >= m) {
      if (absl::Status s = out.Add(r, c); !s.ok()) return s;
    } else {
      by_count[c].push_back(r);
      ++low_distinct;
    }
  }
  std::vector<Record> survivors;
  for (int64_t k = 1; k < m; ++k) {
    auto it = by_count.find(k);
    if (it != by_count.end()) {
      survivors.insert(survivors.end(), it->second.begin(), it->second.end());
    }
    const size_t keep = static_cast<size_t>(
        (k * static_cast<int64_t>(survivors.size())) / (k + 1));
    SampleInPlace(survivors, keep, rng);
    survivors.resize(keep);
  }
  for (const Record& r : survivors) {
    if (absl::Status s = out.Add(r, m); !s.ok()) return s;
    int64_t k = data.Count(r);
    local.mass_by_count[k].second += m;
  }
  for (const auto& [k, records] : by_count) {
    local.mass_by_count[k].first = k * static_cast<int64_t>(records.size());
  }
  local.promoted = static_cast<int64_t>(survivors.size());
  local.dropped = low_distinct - local.promoted;
  if (restore_size) {
    if (absl::Status s = RestoreSize(out, data.size(), survivors, m, rng, &local);
        !s.ok()) {
      return s;
    }
  }
  if (report != nullptr) *report = std::move(local);
  return out;
}

absl::StatusOr<Dataset> Project(const Dataset& data, int64_t m,
                                ProjectionAlgorithm algorithm,
                                NoiseSource& noise, ProjectionReport* report) {
  std::unique_ptr<RandomStream> rng = noise.Stream("projection");
  if (algorithm == ProjectionAlgorithm::kLegacy) {
    return ProjectMinOccurrenceLegacy(data, m, *rng, report);
  }
  return ProjectMinOccurrence(data, m, *rng, report);
}

}  // namespace dpsynth
