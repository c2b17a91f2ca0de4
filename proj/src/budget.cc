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

#include "dpsynth/budget.h"

#include <charconv>
#include <cmath>
#include <system_error>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"

namespace dpsynth {

absl::StatusOr<Epsilon> ParseEpsilon(std::string_view text) {
  while (!text.empty() && absl::ascii_isspace(text.front())) text.remove_prefix(1);
  while (!text.empty() && absl::ascii_isspace(text.back())) text.remove_suffix(1);
  if (text.empty()) return absl::InvalidArgumentError("empty budget");
  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  int64_t exponent = 0;
  size_t e = text.find_first_of("eE");
  if (e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    if (!exp_text.empty() && exp_text.front() == '+') exp_text.remove_prefix(1);
    auto [p, ec] = std::from_chars(exp_text.data(),
                                   exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc() || p != exp_text.data() + exp_text.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad exponent in budget '", std::string(text), "'"));
    }
    text = text.substr(0, e);
  }
  int64_t num = 0;
  int64_t den = 1;
  bool seen_point = false;
  bool seen_digit = false;
  for (char c : text) {
    if (c == '.') {
      if (seen_point) return absl::InvalidArgumentError("two decimal points");
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') {
      return absl::InvalidArgumentError(
          absl::StrCat("budget '", std::string(text), "' is not a decimal"));
    }
    seen_digit = true;
    if (num > (INT64_MAX - 9) / 10) {
      return absl::OutOfRangeError("budget has too many digits");
    }
    num = num * 10 + (c - '0');
    if (seen_point) {
      if (den > INT64_MAX / 10) {
        return absl::OutOfRangeError("budget has too many digits");
      }
      den *= 10;
    }
  }
  if (!seen_digit) return absl::InvalidArgumentError("budget has no digits");
  for (; exponent > 0; --exponent) {
    if (num > INT64_MAX / 10) return absl::OutOfRangeError("budget too large");
    num *= 10;
  }
  for (; exponent < 0; ++exponent) {
    if (den > INT64_MAX / 10) return absl::OutOfRangeError("budget too small");
    den *= 10;
  }
  Epsilon out(num, den);
  return negative ? -out : out;
}

absl::StatusOr<Epsilon> EpsilonFromDouble(double value) {
  if (!std::isfinite(value)) {
    return absl::InvalidArgumentError("budget must be finite");
  }
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return absl::InternalError("cannot format budget");
  return ParseEpsilon(std::string_view(buf, p - buf));
}

double ToDouble(const Epsilon& e) {
  return static_cast<double>(e.numerator()) /
         static_cast<double>(e.denominator());
}

std::string FormatEpsilon(const Epsilon& e) {
  int64_t den = e.denominator();
  int twos = 0;
  int fives = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++twos;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++fives;
  }
  if (den != 1) return absl::StrCat(e.numerator(), "/", e.denominator());
  int digits = std::max(twos, fives);
  int64_t scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  int64_t scaled = e.numerator() * (scale / e.denominator());
  bool negative = scaled < 0;
  uint64_t mag = negative ? -static_cast<uint64_t>(scaled) : scaled;
  std::string whole = absl::StrCat(mag / scale);
  std::string out = negative ? absl::StrCat("-", whole) : whole;
  if (digits > 0) {
    std::string frac = absl::StrCat(mag % scale);
    frac.insert(0, digits - frac.size(), '0');
    absl::StrAppend(&out, ".", frac);
  }
  return out;
}

absl::Status BudgetLedger::Charge(LedgerEntry entry) {
  if (entry.epsilon <= 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("charge '", entry.label, "' must have positive epsilon"));
  }
  entries_.push_back(std::move(entry));
  return absl::OkStatus();
}

absl::Status BudgetLedger::set_selection_factor(int factor) {
  if (factor != 1 && factor != 2) {
    return absl::InvalidArgumentError("selection factor must be 1 or 2");
  }
  selection_factor_ = factor;
  return absl::OkStatus();
}

Epsilon BudgetLedger::InsideSum() const {
  Epsilon sum(0);
  for (const LedgerEntry& e : entries_) {
    if (e.inside_selection) sum += e.epsilon;
  }
  return sum;
}

Epsilon BudgetLedger::OutsideSum() const {
  Epsilon sum(0);
  for (const LedgerEntry& e : entries_) {
    if (!e.inside_selection) sum += e.epsilon;
  }
  return sum;
}

Epsilon BudgetLedger::Total() const {
  return Epsilon(selection_factor_) * InsideSum() + OutsideSum();
}

Epsilon Compose(const BudgetLedger& ledger) { return ledger.Total(); }

}  // namespace dpsynth
