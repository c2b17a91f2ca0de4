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

#include "dpsynth/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/numbers.h"
#include "absl/strings/ascii.h"

namespace dpsynth {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

BinSpec BinSpec::Single(std::string label, double value) {
  BinSpec b;
  b.label = std::move(label);
  b.single_value = value;
  return b;
}

BinSpec BinSpec::Range(std::string label, double lower, double upper) {
  BinSpec b;
  b.label = std::move(label);
  b.lower = lower;
  b.upper = upper;
  return b;
}

BinSpec BinSpec::Below(std::string label, double upper, double edge) {
  BinSpec b;
  b.label = std::move(label);
  b.upper = upper;
  b.edge = edge;
  return b;
}

BinSpec BinSpec::Above(std::string label, double lower, double edge) {
  BinSpec b;
  b.label = std::move(label);
  b.lower = lower;
  b.edge = edge;
  return b;
}

double BinSpec::Low() const {
  if (single_value) return *single_value;
  return lower ? *lower : -kInf;
}

double BinSpec::High() const {
  if (single_value) return *single_value;
  return upper ? *upper : kInf;
}

bool BinSpec::Contains(double value) const {
  return value >= Low() && value <= High();
}

bool BinSpec::StrictlyInside(double value) const {
  return value > Low() && value < High();
}

absl::Status BinSpec::Validate() const {
  if (label.empty()) return absl::InvalidArgumentError("bin without label");
  if (single_value) {
    if (lower || upper || edge) {
      return absl::InvalidArgumentError(
          absl::StrCat("bin '", label, "' mixes a single value and bounds"));
    }
    return absl::OkStatus();
  }
  if (lower && upper) {
    if (*lower > *upper) {
      return absl::InvalidArgumentError(
          absl::StrCat("bin '", label, "' has lower > upper"));
    }
    return absl::OkStatus();
  }
  if (!lower && !upper) {
    return absl::InvalidArgumentError(
        absl::StrCat("bin '", label, "' has no value or bounds"));
  }
  if (!edge) {
    return absl::InvalidArgumentError(
        absl::StrCat("open-ended bin '", label, "' needs an explicit edge"));
  }
  return absl::OkStatus();
}

double BinToNumeric(const BinSpec& bin) {
  if (bin.single_value) return *bin.single_value;
  if (bin.lower && bin.upper) return 0.5 * (*bin.lower + *bin.upper);
  return *bin.edge;
}

absl::Status ColumnSpec::Validate() const {
  if (name.empty()) return absl::InvalidArgumentError("column without name");
  if (!(lower_bound < upper_bound)) {
    return absl::InvalidArgumentError(
        absl::StrCat("column '", name, "' needs L < U"));
  }
  if (bins.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("column '", name, "' has no bins"));
  }
  if (bins.size() > static_cast<size_t>(std::numeric_limits<BinIndex>::max())) {
    return absl::InvalidArgumentError(
        absl::StrCat("column '", name, "' has too many bins"));
  }
  std::set<std::string> labels;
  for (size_t i = 0; i < bins.size(); ++i) {
    if (absl::Status s = bins[i].Validate(); !s.ok()) return s;
    if (!labels.insert(bins[i].label).second) {
      return absl::InvalidArgumentError(absl::StrCat(
          "column '", name, "' repeats label '", bins[i].label, "'"));
    }
    if (i > 0 && !(bins[i - 1].High() < bins[i].Low())) {
      return absl::InvalidArgumentError(
          absl::StrCat("column '", name, "': bins '", bins[i - 1].label,
                       "' and '", bins[i].label,
                       "' overlap or are out of order"));
    }
  }
  return absl::OkStatus();
}

BinIndex ColumnSpec::Find(double value) const {
  for (size_t i = 0; i < bins.size(); ++i) {
    if (bins[i].Contains(value)) return static_cast<BinIndex>(i);
  }
  return kMissing;
}

BinIndex ColumnSpec::FindLabel(const std::string& label) const {
  for (size_t i = 0; i < bins.size(); ++i) {
    if (bins[i].label == label) return static_cast<BinIndex>(i);
  }
  return kMissing;
}

int64_t UniverseSize(const Domain& domain) {
  int64_t size = 1;
  for (const ColumnSpec& c : domain) size *= static_cast<int64_t>(c.bins.size());
  return size;
}

int ColumnIndex(const Domain& domain, const std::string& name) {
  for (size_t i = 0; i < domain.size(); ++i) {
    if (domain[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Dataset::Dataset(std::shared_ptr<const Domain> domain)
    : domain_(std::move(domain)) {}

absl::Status Dataset::CheckRecord(const Record& record) const {
  if (record.size() != domain_->size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("record has ", record.size(), " values, domain has ",
                     domain_->size(), " columns"));
  }
  for (size_t i = 0; i < record.size(); ++i) {
    BinIndex v = record[i];
    if (v == kMissing) continue;
    if (v < 0 || static_cast<size_t>(v) >= (*domain_)[i].bins.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "bin index ", v, " out of range for column '", (*domain_)[i].name,
          "'"));
    }
  }
  return absl::OkStatus();
}

absl::Status Dataset::Add(const Record& record, int64_t count) {
  if (count < 0) return absl::InvalidArgumentError("negative count");
  if (count == 0) return absl::OkStatus();
  if (absl::Status s = CheckRecord(record); !s.ok()) return s;
  counts_[record] += count;
  size_ += count;
  return absl::OkStatus();
}

absl::Status Dataset::Set(const Record& record, int64_t count) {
  if (count < 0) return absl::InvalidArgumentError("negative count");
  if (absl::Status s = CheckRecord(record); !s.ok()) return s;
  auto it = counts_.find(record);
  if (it != counts_.end()) {
    size_ -= it->second;
    if (count == 0) {
      counts_.erase(it);
      return absl::OkStatus();
    }
    it->second = count;
  } else if (count > 0) {
    counts_.emplace(record, count);
  }
  size_ += count;
  return absl::OkStatus();
}

int64_t Dataset::Count(const Record& record) const {
  auto it = counts_.find(record);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<Record> Dataset::Records() const {
  std::vector<Record> out;
  out.reserve(counts_.size());
  for (const auto& [r, c] : counts_) out.push_back(r);
  return out;
}

std::vector<Record> Dataset::RecordsWithCount(int64_t k) const {
  std::vector<Record> out;
  for (const auto& [r, c] : counts_) {
    if (c == k) out.push_back(r);
  }
  return out;
}

int64_t Dataset::NumWithCount(int64_t k) const {
  int64_t num = 0;
  for (const auto& [r, c] : counts_) num += (c == k);
  return num;
}

int64_t Dataset::MinCount() const {
  int64_t m = 0;
  for (const auto& [r, c] : counts_) {
    if (m == 0 || c < m) m = c;
  }
  return m;
}

const std::vector<BinSpec>* ColumnDefinition::Alternative(
    const std::string& alt) const {
  if (alt == kRawAlternative) return &raw_bins;
  for (const auto& [name, bins] : alternatives) {
    if (name == alt) return &bins;
  }
  return nullptr;
}

absl::Status Schema::Validate() const {
  if (columns.empty()) return absl::InvalidArgumentError("schema is empty");
  std::set<std::string> names;
  for (const ColumnDefinition& c : columns) {
    if (!names.insert(c.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate column '", c.name, "'"));
    }
    ColumnSpec raw{c.name, c.raw_bins, c.lower_bound, c.upper_bound,
                   c.categorical, {}};
    if (absl::Status s = raw.Validate(); !s.ok()) return s;
    for (const auto& [alt, bins] : c.alternatives) {
      if (alt == kRawAlternative) {
        return absl::InvalidArgumentError(
            absl::StrCat("alternative name '", alt, "' is reserved"));
      }
      ColumnSpec spec{c.name, bins, c.lower_bound, c.upper_bound,
                      c.categorical, {}};
      if (absl::Status s = spec.Validate(); !s.ok()) return s;
      absl::StatusOr<std::vector<BinIndex>> map = BinMapping(c.raw_bins, bins);
      if (!map.ok()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "column '", c.name, "' alternative '", alt,
            "': ", map.status().message()));
      }
      if (!c.coarse_bins.empty()) {
        absl::StatusOr<std::vector<BinIndex>> cm =
            BinMapping(bins, c.coarse_bins);
        if (!cm.ok()) {
          return absl::InvalidArgumentError(absl::StrCat(
              "column '", c.name, "' alternative '", alt,
              "' does not refine the coarse table: ", cm.status().message()));
        }
      }
    }
    if (!c.coarse_bins.empty()) {
      ColumnSpec coarse{c.name, c.coarse_bins, c.lower_bound, c.upper_bound,
                        c.categorical, {}};
      if (absl::Status s = coarse.Validate(); !s.ok()) return s;
      if (absl::StatusOr<std::vector<BinIndex>> cm =
              BinMapping(c.raw_bins, c.coarse_bins);
          !cm.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat("column '", c.name, "' raw bins do not refine the "
                         "coarse table: ", cm.status().message()));
      }
    }
  }
  return absl::OkStatus();
}

int Schema::Index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::shared_ptr<const Domain> Schema::RawDomain() const {
  auto domain = std::make_shared<Domain>();
  for (const ColumnDefinition& c : columns) {
    domain->push_back(ColumnSpec{c.name, c.raw_bins, c.lower_bound,
                                 c.upper_bound, c.categorical, c.coarse_bins});
  }
  return domain;
}

TransformPlan TransformPlan::Identity(const Schema& schema) {
  return TransformPlan{
      std::vector<std::string>(schema.columns.size(), kRawAlternative)};
}

absl::Status TransformPlan::Validate(const Schema& schema) const {
  if (alternatives.size() != schema.columns.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("plan names ", alternatives.size(),
                     " alternatives for ", schema.columns.size(), " columns"));
  }
  for (size_t i = 0; i < alternatives.size(); ++i) {
    if (schema.columns[i].Alternative(alternatives[i]) == nullptr) {
      return absl::InvalidArgumentError(
          absl::StrCat("column '", schema.columns[i].name,
                       "' has no alternative '", alternatives[i], "'"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<BinIndex>> BinMapping(
    const std::vector<BinSpec>& source, const std::vector<BinSpec>& target) {
  std::vector<BinIndex> map(source.size(), kMissing);
  for (size_t i = 0; i < source.size(); ++i) {
    for (size_t j = 0; j < target.size(); ++j) {
      if (target[j].Contains(source[i].Low()) &&
          target[j].Contains(source[i].High())) {
        map[i] = static_cast<BinIndex>(j);
        break;
      }
    }
    if (map[i] == kMissing) {
      return absl::InvalidArgumentError(absl::StrCat(
          "bin '", source[i].label, "' is not covered by any target bin"));
    }
  }
  return map;
}

absl::StatusOr<Dataset> ApplyTransform(const Dataset& raw,
                                       const Schema& schema,
                                       const TransformPlan& plan) {
  if (absl::Status s = plan.Validate(schema); !s.ok()) return s;
  if (static_cast<size_t>(raw.num_columns()) != schema.columns.size()) {
    return absl::InvalidArgumentError("dataset does not match the schema");
  }
  auto domain = std::make_shared<Domain>();
  std::vector<std::vector<BinIndex>> maps;
  for (size_t i = 0; i < schema.columns.size(); ++i) {
    const ColumnDefinition& def = schema.columns[i];
    const std::vector<BinSpec>& target = *def.Alternative(plan.alternatives[i]);
    absl::StatusOr<std::vector<BinIndex>> map =
        BinMapping(raw.domain()[i].bins, target);
    if (!map.ok()) return map.status();
    maps.push_back(*std::move(map));
    domain->push_back(ColumnSpec{def.name, target, def.lower_bound,
                                 def.upper_bound, def.categorical,
                                 def.coarse_bins});
  }
  Dataset out(domain);
  Record mapped(maps.size());
  for (const auto& [record, count] : raw.counts()) {
    for (size_t i = 0; i < record.size(); ++i) {
      if (record[i] == kMissing) {
        return absl::InvalidArgumentError(absl::StrCat(
            "missing value in column '", schema.columns[i].name,
            "'; filter raw data first"));
      }
      mapped[i] = maps[i][record[i]];
    }
    if (absl::Status s = out.Add(mapped, count); !s.ok()) return s;
  }
  return out;
}

absl::StatusOr<Dataset> CoarseRebin(const Dataset& dataset,
                                    const std::string& column) {
  int c = ColumnIndex(dataset.domain(), column);
  if (c < 0) {
    return absl::InvalidArgumentError(absl::StrCat("no column '", column, "'"));
  }
  const ColumnSpec& spec = dataset.domain()[c];
  if (spec.coarse_bins.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("column '", column, "' declares no coarse table"));
  }
  absl::StatusOr<std::vector<BinIndex>> map =
      BinMapping(spec.bins, spec.coarse_bins);
  if (!map.ok()) return map.status();
  auto domain = std::make_shared<Domain>(dataset.domain());
  (*domain)[c].bins = spec.coarse_bins;
  Dataset out(domain);
  for (const auto& [record, count] : dataset.counts()) {
    Record mapped = record;
    mapped[c] = (*map)[record[c]];
    if (absl::Status s = out.Add(mapped, count); !s.ok()) return s;
  }
  return out;
}

namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells = absl::StrSplit(line, ',');
  for (std::string& cell : cells) {
    absl::StripAsciiWhitespace(&cell);
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') {
      cell = cell.substr(1, cell.size() - 2);
    }
  }
  return cells;
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parses the header and returns, for each schema column, its CSV position.
absl::StatusOr<std::vector<int>> HeaderPositions(
    const std::string& header, const std::vector<std::string>& names) {
  std::vector<std::string> cells = SplitCsvLine(header);
  std::vector<int> pos;
  for (const std::string& name : names) {
    auto it = std::find(cells.begin(), cells.end(), name);
    if (it == cells.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("CSV header lacks column '", name, "'"));
    }
    pos.push_back(static_cast<int>(it - cells.begin()));
  }
  return pos;
}

}  // namespace

absl::StatusOr<Dataset> ParseRawCsv(const std::string& text,
                                    const Schema& schema) {
  std::shared_ptr<const Domain> domain = schema.RawDomain();
  std::vector<std::string> names;
  for (const ColumnSpec& c : *domain) names.push_back(c.name);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("CSV has no header");
  }
  absl::StatusOr<std::vector<int>> pos = HeaderPositions(line, names);
  if (!pos.ok()) return pos.status();
  Dataset out(domain);
  Record record(domain->size());
  int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    std::vector<std::string> cells = SplitCsvLine(line);
    for (size_t i = 0; i < domain->size(); ++i) {
      const ColumnSpec& col = (*domain)[i];
      size_t p = static_cast<size_t>((*pos)[i]);
      std::string cell = p < cells.size() ? cells[p] : "";
      if (cell.empty() || cell == "NA") {
        record[i] = kMissing;
        continue;
      }
      BinIndex b = col.FindLabel(cell);
      if (!col.categorical && b == kMissing) {
        double v;
        if (!absl::SimpleAtod(cell, &v) || !std::isfinite(v)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "line ", line_no, ": '", cell, "' is not a number for column '",
              col.name, "'"));
        }
        b = col.Find(v);
      }
      if (b == kMissing) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": value '", cell,
                         "' is outside the raw domain of '", col.name, "'"));
      }
      record[i] = b;
    }
    if (absl::Status s = out.Add(record); !s.ok()) return s;
  }
  return out;
}

absl::StatusOr<Dataset> ReadRawCsv(const std::string& path,
                                   const Schema& schema) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  return ParseRawCsv(*text, schema);
}

std::string FormatLabelCsv(const Dataset& dataset) {
  std::string out;
  std::vector<std::string> names;
  for (const ColumnSpec& c : dataset.domain()) names.push_back(c.name);
  absl::StrAppend(&out, absl::StrJoin(names, ","), "\n");
  std::vector<std::string> cells(names.size());
  for (const auto& [record, count] : dataset.counts()) {
    for (size_t i = 0; i < record.size(); ++i) {
      cells[i] = record[i] == kMissing ? "NA"
                                       : dataset.domain()[i].bins[record[i]].label;
    }
    std::string row = absl::StrCat(absl::StrJoin(cells, ","), "\n");
    for (int64_t c = 0; c < count; ++c) out += row;
  }
  return out;
}

absl::Status WriteLabelCsv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::InternalError(absl::StrCat("cannot write ", path));
  out << FormatLabelCsv(dataset);
  return out ? absl::OkStatus()
             : absl::InternalError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<Dataset> ParseLabelCsv(const std::string& text,
                                      std::shared_ptr<const Domain> domain) {
  std::vector<std::string> names;
  for (const ColumnSpec& c : *domain) names.push_back(c.name);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("CSV has no header");
  }
  absl::StatusOr<std::vector<int>> pos = HeaderPositions(line, names);
  if (!pos.ok()) return pos.status();
  Dataset out(domain);
  Record record(domain->size());
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    std::vector<std::string> cells = SplitCsvLine(line);
    for (size_t i = 0; i < domain->size(); ++i) {
      size_t p = static_cast<size_t>((*pos)[i]);
      std::string cell = p < cells.size() ? cells[p] : "";
      BinIndex b = (*domain)[i].FindLabel(cell);
      if (b == kMissing) {
        return absl::InvalidArgumentError(absl::StrCat(
            "unknown label '", cell, "' in column '", (*domain)[i].name, "'"));
      }
      record[i] = b;
    }
    if (absl::Status s = out.Add(record); !s.ok()) return s;
  }
  return out;
}

}  // namespace dpsynth
