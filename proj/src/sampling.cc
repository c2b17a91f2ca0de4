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

#include "absl/strings/str_cat.h"
#include "dpsynth/synthesizers.h"

namespace dpsynth {

absl::StatusOr<Dataset> SampleConstrained(const GenerativeModel& model,
                                          int64_t n,
                                          const ConstraintSet& constraints,
                                          NoiseSource& noise,
                                          const SamplingOptions& options,
                                          SamplingReport* report) {
  if (n <= 0) return absl::InvalidArgumentError("sample size must be positive");
  auto domain = std::make_shared<const Domain>(model.domain());
  Dataset out(domain);
  std::unique_ptr<RandomStream> rng = noise.Stream("sample");
  int64_t draws = 0;
  int64_t window_draws = 0;
  int64_t window_accepted = 0;
  const double floor_count = options.acceptance_floor * options.window;
  while (out.size() < n) {
    Record r = model.Sample(*rng);
    ++draws;
    ++window_draws;
    if (constraints.Accepts(r)) {
      if (absl::Status s = out.Add(r); !s.ok()) return s;
      ++window_accepted;
    }
    if (window_draws == options.window) {
      if (window_accepted < floor_count) {
        if (report != nullptr) *report = {draws, out.size()};
        return absl::AbortedError(absl::StrCat(
            "acceptance rate ", static_cast<double>(window_accepted) / window_draws,
            " is below the floor ", options.acceptance_floor));
      }
      window_draws = 0;
      window_accepted = 0;
    }
  }
  if (report != nullptr) *report = {draws, out.size()};
  return out;
}

}  // namespace dpsynth
