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

#ifndef DPSYNTH_PROJECTION_H_
#define DPSYNTH_PROJECTION_H_

#include <cstdint>
#include <map>
#include <string>

#include "absl/status/statusor.h"
#include "dpsynth/dataset.h"
#include "dpsynth/noise.h"

namespace dpsynth {

enum class ProjectionAlgorithm { kPrimary, kLegacy };

absl::StatusOr<ProjectionAlgorithm> ParseProjectionAlgorithm(
    const std::string& name);

struct ProjectionReport {
  int64_t promoted = 0;    // distinct records raised to count m
  int64_t dropped = 0;     // distinct records removed
  int64_t duplicated = 0;  // copies added to restore the size
  // For each k < m: input mass k * n_k, and the mass m * (#promoted from k).
  std::map<int64_t, std::pair<int64_t, int64_t>> mass_by_count;
};

// Raises records seen fewer than m times to exactly m times or drops them:
// for each k < m, floor(k * n_k / m) distinct count-k records are promoted.
// Records with count >= m are untouched. The size is then restored by
// adding copies of promoted records (or, without any, of records already
// at count >= m).
absl::StatusOr<Dataset> ProjectMinOccurrence(const Dataset& data, int64_t m,
                                             RandomStream& rng,
                                             ProjectionReport* report = nullptr,
                                             bool restore_size = true);

// Cascading variant: R_k keeps a k/(k+1) fraction of R_{k-1} together with
// the count-k records, and survivors of R_{m-1} are set to count m.
absl::StatusOr<Dataset> ProjectMinOccurrenceLegacy(
    const Dataset& data, int64_t m, RandomStream& rng,
    ProjectionReport* report = nullptr, bool restore_size = true);

// Runs `algorithm` with a logged stream drawn from `noise`.
absl::StatusOr<Dataset> Project(const Dataset& data, int64_t m,
                                ProjectionAlgorithm algorithm,
                                NoiseSource& noise,
                                ProjectionReport* report = nullptr);

}  // namespace dpsynth

#endif  // DPSYNTH_PROJECTION_H_
