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

#ifndef DPSYNTH_DATASET_H_
#define DPSYNTH_DATASET_H_

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpsynth {

// Index of a bin within its column; kMissing marks an absent raw value.
using BinIndex = int16_t;
inline constexpr BinIndex kMissing = -1;

// One bin of an ordered column. Values are integers; a bin covers the
// inclusive range [lower, upper], where an absent bound is open-ended.
// A bin is either a single value, a bounded range, or open on one side.
// Open-ended bins carry an explicit numeric edge used for conversion.
struct BinSpec {
  std::string label;
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> single_value;
  std::optional<double> edge;

  static BinSpec Single(std::string label, double value);
  static BinSpec Range(std::string label, double lower, double upper);
  static BinSpec Below(std::string label, double upper, double edge);
  static BinSpec Above(std::string label, double lower, double edge);

  // Smallest and largest covered value, with infinities for open sides.
  double Low() const;
  double High() const;
  bool Contains(double value) const;
  // True when `value` lies inside the bin but is not one of its edges.
  bool StrictlyInside(double value) const;
  absl::Status Validate() const;
};

// Converts a bin to the number used by numeric criteria: a single value is
// itself, a bounded range maps to its midpoint, an open bin to its edge.
double BinToNumeric(const BinSpec& bin);

// The active domain of one column.
struct ColumnSpec {
  std::string name;
  std::vector<BinSpec> bins;
  double lower_bound = 0.0;
  double upper_bound = 1.0;
  bool categorical = false;
  // Optional coarse bins used by group-by criteria.
  std::vector<BinSpec> coarse_bins;

  absl::Status Validate() const;
  // Index of the bin containing `value`, or kMissing.
  BinIndex Find(double value) const;
  // Index of the bin whose label is `label`, or kMissing.
  BinIndex FindLabel(const std::string& label) const;
};

using Domain = std::vector<ColumnSpec>;

// Number of cells in the record universe of `domain`.
int64_t UniverseSize(const Domain& domain);
// Position of `name` in `domain`, or -1.
int ColumnIndex(const Domain& domain, const std::string& name);

using Record = std::vector<BinIndex>;

// A multiset of records over a fixed domain.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::shared_ptr<const Domain> domain);

  const Domain& domain() const { return *domain_; }
  std::shared_ptr<const Domain> shared_domain() const { return domain_; }
  int num_columns() const { return static_cast<int>(domain_->size()); }

  // Adds `count` copies of `record`. Indices are checked against the
  // domain; kMissing is accepted so raw ingestion can carry gaps.
  absl::Status Add(const Record& record, int64_t count = 1);
  // Sets the multiplicity of `record`; zero removes it.
  absl::Status Set(const Record& record, int64_t count);
  int64_t Count(const Record& record) const;

  // Total number of records n.
  int64_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  int64_t distinct() const { return static_cast<int64_t>(counts_.size()); }

  const std::map<Record, int64_t>& counts() const { return counts_; }
  // Rec(D): the distinct records.
  std::vector<Record> Records() const;
  // Rec(D, #=k): the distinct records with multiplicity exactly k.
  std::vector<Record> RecordsWithCount(int64_t k) const;
  // n_k: the number of distinct records with multiplicity exactly k.
  int64_t NumWithCount(int64_t k) const;
  int64_t MinCount() const;

  bool operator==(const Dataset& other) const {
    return counts_ == other.counts_;
  }

 private:
  absl::Status CheckRecord(const Record& record) const;

  std::shared_ptr<const Domain> domain_;
  std::map<Record, int64_t> counts_;
  int64_t size_ = 0;
};

// Declared column with its ingestion bins and its transformation options.
struct ColumnDefinition {
  std::string name;
  bool categorical = false;
  double lower_bound = 0.0;
  double upper_bound = 1.0;
  std::vector<BinSpec> raw_bins;
  std::vector<std::pair<std::string, std::vector<BinSpec>>> alternatives;
  std::vector<BinSpec> coarse_bins;

  const std::vector<BinSpec>* Alternative(const std::string& name) const;
};

struct Schema {
  std::vector<ColumnDefinition> columns;

  absl::Status Validate() const;
  int Index(const std::string& name) const;
  // The domain of ingested, untransformed data.
  std::shared_ptr<const Domain> RawDomain() const;
};

// Chosen alternative per column, in schema column order.
struct TransformPlan {
  std::vector<std::string> alternatives;

  // Plan keeping every column at ingestion resolution.
  static TransformPlan Identity(const Schema& schema);
  absl::Status Validate(const Schema& schema) const;
};

inline constexpr char kRawAlternative[] = "raw";

// Maps each raw bin into the unique target bin containing it.
absl::StatusOr<Dataset> ApplyTransform(const Dataset& raw,
                                       const Schema& schema,
                                       const TransformPlan& plan);

// Replaces the bins of `column` with its coarse table.
absl::StatusOr<Dataset> CoarseRebin(const Dataset& dataset,
                                    const std::string& column);

// For each source bin, the index of the target bin containing it.
absl::StatusOr<std::vector<BinIndex>> BinMapping(
    const std::vector<BinSpec>& source, const std::vector<BinSpec>& target);

// Reads a CSV with a header naming every schema column. Numeric columns
// hold integers, categorical columns hold labels; empty or "NA" cells are
// missing. Values outside every raw bin are rejected.
absl::StatusOr<Dataset> ReadRawCsv(const std::string& path,
                                   const Schema& schema);
absl::StatusOr<Dataset> ParseRawCsv(const std::string& text,
                                    const Schema& schema);

// Writes one row per record copy, cells holding bin labels.
absl::Status WriteLabelCsv(const Dataset& dataset, const std::string& path);
std::string FormatLabelCsv(const Dataset& dataset);
// Reads a CSV of bin labels over `domain`.
absl::StatusOr<Dataset> ParseLabelCsv(const std::string& text,
                                      std::shared_ptr<const Domain> domain);

// Loads a schema from its JSON text or file.
absl::StatusOr<Schema> ParseSchemaJson(const std::string& text);
absl::StatusOr<Schema> LoadSchema(const std::string& path);

}  // namespace dpsynth

#endif  // DPSYNTH_DATASET_H_
