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

#include "dpsynth/corpus.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "absl/strings/str_cat.h"

namespace dpsynth {

std::string GenerateBirthCorpusCsv(const CorpusOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> month(1, 12);
  std::normal_distribution<double> age(30.0, 5.5);
  std::normal_distribution<double> gest(39.2, 1.5);
  std::normal_distribution<double> weight_noise(0.0, 380.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::string out =
      "birth_month,mother_age,parity,gestation_week,birth_sex,birth_weight\n";
  for (int64_t i = 0; i < options.n; ++i) {
    const int m = month(rng);
    const int a = std::clamp(static_cast<int>(std::lround(age(rng))), 16, 47);
    std::poisson_distribution<int> extra(std::max(0.3, 0.9 + 0.03 * (a - 30)));
    const int parity = std::min(1 + extra(rng), 14);
    int g = static_cast<int>(std::lround(gest(rng)));
    if (unit(rng) < 0.06) g -= 1 + static_cast<int>(unit(rng) * 5);  // preterm
    g = std::clamp(g, 28, 43);
    const bool male = unit(rng) < 0.51;
    double w = 3350.0 + 170.0 * (g - 39) + (male ? 110.0 : -110.0) +
               25.0 * std::min(parity - 1, 3) + weight_noise(rng);
    const int weight = std::clamp(static_cast<int>(std::lround(w)), 700, 5400);
    std::string row = absl::StrCat(m, ",", a, ",", parity, ",", g, ",",
                                   male ? "M" : "F", ",", weight);
    if (unit(rng) < options.dirty_fraction) {
      // Missing month, or a weight below every plausible bin.
      row = unit(rng) < 0.5
                ? absl::StrCat(",", a, ",", parity, ",", g, ",",
                               male ? "M" : "F", ",", weight)
                : absl::StrCat(m, ",", a, ",", parity, ",", g, ",",
                               male ? "M" : "F", ",", 450);
    }
    absl::StrAppend(&out, row, "\n");
  }
  return out;
}

absl::StatusOr<Dataset> GenerateBirthCorpus(const Schema& schema,
                                            const CorpusOptions& options) {
  return ParseRawCsv(GenerateBirthCorpusCsv(options), schema);
}

}  // namespace dpsynth
