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

#ifndef DPSYNTH_CORPUS_H_
#define DPSYNTH_CORPUS_H_

#include <cstdint>
#include <string>

#include "absl/status/statusor.h"
#include "dpsynth/dataset.h"

namespace dpsynth {

struct CorpusOptions {
  int64_t n = 10000;
  uint64_t seed = 1;
  // Share of rows given a missing field or an implausible value, to be
  // removed by raw filtering.
  double dirty_fraction = 0.01;
};

// Birth-like public stand-in: age drives parity, gestation drives weight,
// boys are slightly heavier. Columns follow the birth schema, one value per
// cell.
std::string GenerateBirthCorpusCsv(const CorpusOptions& options);

absl::StatusOr<Dataset> GenerateBirthCorpus(const Schema& schema,
                                            const CorpusOptions& options);

}  // namespace dpsynth

#endif  // DPSYNTH_CORPUS_H_
