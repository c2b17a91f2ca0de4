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
#include <sstream>

#include "absl/strings/str_cat.h"
#include "dpsynth/dataset.h"
#include "json.hpp"

namespace dpsynth {
namespace {

using nlohmann::json;

std::string NumberLabel(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// A bin entry is either one bin or a {"range": {from, to, step}} expansion
// into consecutive bins "from-(from+step-1)", ... ending at `to`.
absl::Status AppendBins(const json& entry, std::vector<BinSpec>* out) {
  if (!entry.is_object()) return absl::InvalidArgumentError("bin must be object");
  if (entry.contains("range")) {
    const json& r = entry["range"];
    double from = r.at("from").get<double>();
    double to = r.at("to").get<double>();
    double step = r.value("step", 1.0);
    if (step <= 0 || from > to) {
      return absl::InvalidArgumentError("invalid bin range");
    }
    for (double lo = from; lo <= to; lo += step) {
      double hi = std::min(lo + step - 1, to);
      if (lo == hi) {
        out->push_back(BinSpec::Single(NumberLabel(lo), lo));
      } else {
        out->push_back(BinSpec::Range(
            absl::StrCat(NumberLabel(lo), "-", NumberLabel(hi)), lo, hi));
      }
    }
    return absl::OkStatus();
  }
  BinSpec b;
  b.label = entry.at("label").get<std::string>();
  if (entry.contains("value")) b.single_value = entry["value"].get<double>();
  if (entry.contains("lower")) b.lower = entry["lower"].get<double>();
  if (entry.contains("upper")) b.upper = entry["upper"].get<double>();
  if (entry.contains("edge")) b.edge = entry["edge"].get<double>();
  out->push_back(std::move(b));
  return absl::OkStatus();
}

absl::StatusOr<std::vector<BinSpec>> ParseBins(const json& list) {
  if (!list.is_array()) return absl::InvalidArgumentError("bins must be a list");
  std::vector<BinSpec> bins;
  for (const json& e : list) {
    if (absl::Status s = AppendBins(e, &bins); !s.ok()) return s;
  }
  return bins;
}

absl::StatusOr<Schema> ParseSchema(const json& doc) {
  Schema schema;
  for (const json& c : doc.at("columns")) {
    ColumnDefinition def;
    def.name = c.at("name").get<std::string>();
    def.categorical = c.value("categorical", false);
    const json& bounds = c.at("bounds");
    if (!bounds.is_array() || bounds.size() != 2) {
      return absl::InvalidArgumentError(
          absl::StrCat("column '", def.name, "': bounds must be [L, U]"));
    }
    def.lower_bound = bounds[0].get<double>();
    def.upper_bound = bounds[1].get<double>();
    absl::StatusOr<std::vector<BinSpec>> raw = ParseBins(c.at("raw_bins"));
    if (!raw.ok()) return raw.status();
    def.raw_bins = *std::move(raw);
    if (c.contains("alternatives")) {
      for (const json& alt : c["alternatives"]) {
        absl::StatusOr<std::vector<BinSpec>> bins = ParseBins(alt.at("bins"));
        if (!bins.ok()) return bins.status();
        def.alternatives.emplace_back(alt.at("name").get<std::string>(),
                                      *std::move(bins));
      }
    }
    if (c.contains("coarse_bins")) {
      absl::StatusOr<std::vector<BinSpec>> coarse =
          ParseBins(c["coarse_bins"]);
      if (!coarse.ok()) return coarse.status();
      def.coarse_bins = *std::move(coarse);
    }
    schema.columns.push_back(std::move(def));
  }
  if (absl::Status s = schema.Validate(); !s.ok()) return s;
  return schema;
}

}  // namespace

absl::StatusOr<Schema> ParseSchemaJson(const std::string& text) {
  try {
    return ParseSchema(json::parse(text));
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("schema: ", e.what()));
  }
}

absl::StatusOr<Schema> LoadSchema(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseSchemaJson(ss.str());
}

}  // namespace dpsynth
