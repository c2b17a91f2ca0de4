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

#include "dpsynth/noise.h"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "absl/strings/escaping.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace dpsynth {
namespace {

void EnsureSodium() {
  static const int init = sodium_init();
  (void)init;
}

std::array<uint8_t, 32> KeyFromSeed(uint64_t seed) {
  EnsureSodium();
  uint8_t in[8];
  for (int i = 0; i < 8; ++i) in[i] = static_cast<uint8_t>(seed >> (8 * i));
  std::array<uint8_t, 32> key;
  crypto_generichash(key.data(), key.size(), in, sizeof(in), nullptr, 0);
  return key;
}

std::string HexKey(const std::array<uint8_t, 32>& key) {
  return absl::BytesToHexString(absl::string_view(
      reinterpret_cast<const char*>(key.data()), key.size()));
}

// Operating-system CSPRNG via libsodium.
class SystemBackend : public RandomBackend {
 public:
  SystemBackend() { EnsureSodium(); }
  uint64_t Next64(std::string_view, std::string_view) override {
    uint64_t v;
    randombytes_buf(&v, sizeof(v));
    return v;
  }
  std::array<uint8_t, 32> NextKey(std::string_view) override {
    std::array<uint8_t, 32> key;
    randombytes_buf(key.data(), key.size());
    return key;
  }
};

// ChaCha20 keyed from a seed.
class SeededBackend : public RandomBackend {
 public:
  explicit SeededBackend(uint64_t seed) : stream_(KeyFromSeed(seed)) {}
  uint64_t Next64(std::string_view, std::string_view) override {
    return stream_.Next64();
  }
  std::array<uint8_t, 32> NextKey(std::string_view) override {
    std::array<uint8_t, 32> key;
    for (int i = 0; i < 4; ++i) {
      uint64_t v = stream_.Next64();
      std::memcpy(key.data() + 8 * i, &v, 8);
    }
    return key;
  }

 private:
  RandomStream stream_;
};

// Returns recorded bits in order and flags any divergence.
class ReplayBackend : public RandomBackend {
 public:
  explicit ReplayBackend(std::vector<TranscriptEntry> entries)
      : entries_(std::move(entries)) {}

  uint64_t Next64(std::string_view purpose, std::string_view kind) override {
    const TranscriptEntry* e = Take(purpose, kind);
    return e ? e->raw : 0;
  }
  std::array<uint8_t, 32> NextKey(std::string_view purpose) override {
    std::array<uint8_t, 32> key{};
    const TranscriptEntry* e = Take(purpose, "stream");
    if (e) {
      std::string bytes = absl::HexStringToBytes(e->key_hex);
      if (bytes.size() == key.size()) {
        std::memcpy(key.data(), bytes.data(), key.size());
      } else {
        Fail("malformed stream key");
      }
    }
    return key;
  }
  absl::Status status() const override { return status_; }

 private:
  const TranscriptEntry* Take(std::string_view purpose, std::string_view kind) {
    if (!status_.ok()) return nullptr;
    if (next_ >= entries_.size()) {
      Fail(absl::StrCat("transcript exhausted at draw '", std::string(purpose), "'"));
      return nullptr;
    }
    const TranscriptEntry& e = entries_[next_++];
    if (e.purpose != purpose || e.kind != kind) {
      Fail(absl::StrCat("transcript entry ", e.seq, " is '", e.purpose, "/",
                        e.kind, "', requested '", std::string(purpose), "/",
                        std::string(kind), "'"));
      return nullptr;
    }
    return &e;
  }
  void Fail(std::string message) {
    if (status_.ok()) status_ = absl::FailedPreconditionError(message);
  }

  std::vector<TranscriptEntry> entries_;
  size_t next_ = 0;
  absl::Status status_;
};

}  // namespace

double BitsToUniform(uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double LaplaceFromUniform(double u, double scale) {
  if (u < 0.5) return scale * std::log(2.0 * u);
  return -scale * std::log(2.0 * (1.0 - u));
}

std::string TranscriptEntry::ToJsonLine() const {
  nlohmann::json j;
  j["seq"] = seq;
  j["purpose"] = purpose;
  j["kind"] = kind;
  if (kind == "stream") {
    j["key"] = key_hex;
  } else {
    j["scale"] = scale;
    j["draw"] = value;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(raw));
    j["raw"] = buf;
  }
  return j.dump();
}

absl::StatusOr<TranscriptEntry> TranscriptEntry::FromJsonLine(
    const std::string& line) {
  try {
    nlohmann::json j = nlohmann::json::parse(line);
    TranscriptEntry e;
    e.seq = j.at("seq").get<uint64_t>();
    e.purpose = j.at("purpose").get<std::string>();
    e.kind = j.at("kind").get<std::string>();
    if (e.kind == "stream") {
      e.key_hex = j.at("key").get<std::string>();
    } else {
      e.scale = j.value("scale", 0.0);
      e.value = j.value("draw", 0.0);
      e.raw = std::stoull(j.at("raw").get<std::string>(), nullptr, 16);
    }
    return e;
  } catch (const std::exception& ex) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad transcript line: ", ex.what()));
  }
}

absl::StatusOr<std::unique_ptr<FileTranscript>> FileTranscript::Open(
    const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::InternalError(absl::StrCat("cannot write ", path));
  return std::unique_ptr<FileTranscript>(new FileTranscript(std::move(out)));
}

void FileTranscript::Append(const TranscriptEntry& entry) {
  out_ << entry.ToJsonLine() << '\n';
}

absl::StatusOr<std::vector<TranscriptEntry>> ReadTranscript(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::vector<TranscriptEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    absl::StatusOr<TranscriptEntry> e = TranscriptEntry::FromJsonLine(line);
    if (!e.ok()) return e.status();
    out.push_back(*std::move(e));
  }
  return out;
}

RandomStream::RandomStream(const std::array<uint8_t, 32>& key) : key_(key) {
  EnsureSodium();
}

void RandomStream::Refill() {
  static const std::array<uint8_t, 512> kZeros{};
  crypto_stream_chacha20_xor_ic(buffer_.data(), kZeros.data(), buffer_.size(),
                                nonce_.data(), block_, key_.data());
  block_ += buffer_.size() / 64;
  pos_ = 0;
}

uint64_t RandomStream::Next64() {
  if (pos_ + 8 > buffer_.size()) Refill();
  uint64_t v;
  std::memcpy(&v, buffer_.data() + pos_, 8);
  pos_ += 8;
  return v;
}

double RandomStream::Uniform() { return BitsToUniform(Next64()); }

uint64_t RandomStream::UniformInt(uint64_t n) {
  if (n <= 1) return 0;
  // Rejection keeps the draw exactly uniform.
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t v;
  do {
    v = Next64();
  } while (v >= limit);
  return v % n;
}

double RandomStream::Laplace(double scale) {
  return LaplaceFromUniform(Uniform(), scale);
}

namespace {

size_t PickIndex(absl::Span<const double> weights, double u) {
  double total = 0.0;
  for (double w : weights) total += w;
  double target = u * total;
  double acc = 0.0;
  size_t last_positive = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

}  // namespace

size_t RandomStream::Categorical(absl::Span<const double> weights) {
  return PickIndex(weights, Uniform());
}

absl::StatusOr<std::unique_ptr<NoiseSource>> NoiseSource::Create(
    NoiseOptions options, TranscriptSink* sink) {
  switch (options.mode) {
    case NoiseMode::kSystem:
      return std::unique_ptr<NoiseSource>(new NoiseSource(
          std::make_unique<SystemBackend>(), NoiseMode::kSystem, sink));
    case NoiseMode::kSeeded:
      if (options.production) {
        return absl::FailedPreconditionError(
            "seeded randomness is refused in production mode");
      }
      return std::unique_ptr<NoiseSource>(
          new NoiseSource(std::make_unique<SeededBackend>(options.seed),
                          NoiseMode::kSeeded, sink));
    case NoiseMode::kReplay:
      if (options.production) {
        return absl::FailedPreconditionError(
            "replayed randomness is refused in production mode");
      }
      return std::unique_ptr<NoiseSource>(new NoiseSource(
          std::make_unique<ReplayBackend>(std::move(options.replay)),
          NoiseMode::kReplay, sink));
  }
  return absl::InvalidArgumentError("unknown noise mode");
}

std::unique_ptr<NoiseSource> NoiseSource::ForTesting(uint64_t seed,
                                                     TranscriptSink* sink) {
  return std::unique_ptr<NoiseSource>(new NoiseSource(
      std::make_unique<SeededBackend>(seed), NoiseMode::kSeeded, sink));
}

void NoiseSource::Log(TranscriptEntry entry) {
  entry.seq = seq_++;
  if (sink_ != nullptr) sink_->Append(entry);
}

double NoiseSource::Uniform(std::string_view purpose) {
  uint64_t raw = backend_->Next64(purpose, "uniform");
  double u = BitsToUniform(raw);
  Log({0, std::string(purpose), "uniform", 0.0, u, raw, ""});
  return u;
}

double NoiseSource::Laplace(double scale, std::string_view purpose) {
  uint64_t raw = backend_->Next64(purpose, "laplace");
  double draw = LaplaceFromUniform(BitsToUniform(raw), scale);
  Log({0, std::string(purpose), "laplace", scale, draw, raw, ""});
  return draw;
}

bool NoiseSource::Bernoulli(double p, std::string_view purpose) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return Uniform(purpose) < p;
}

uint64_t NoiseSource::UniformInt(uint64_t n, std::string_view purpose) {
  if (n <= 1) return 0;
  // One logged uniform; the bias is below 2^-53 * n.
  uint64_t v = static_cast<uint64_t>(Uniform(purpose) * static_cast<double>(n));
  return std::min(v, n - 1);
}

size_t NoiseSource::Categorical(absl::Span<const double> weights,
                                std::string_view purpose) {
  return PickIndex(weights, Uniform(purpose));
}

size_t NoiseSource::ExponentialMechanism(absl::Span<const double> scores,
                                         double epsilon, double sensitivity,
                                         std::string_view purpose) {
  double best = -std::numeric_limits<double>::infinity();
  for (double s : scores) best = std::max(best, s);
  std::vector<double> weights(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    weights[i] = std::exp(epsilon * (scores[i] - best) / (2.0 * sensitivity));
  }
  return Categorical(weights, purpose);
}

std::unique_ptr<RandomStream> NoiseSource::Stream(std::string_view purpose) {
  std::array<uint8_t, 32> key = backend_->NextKey(purpose);
  TranscriptEntry e;
  e.purpose = std::string(purpose);
  e.kind = "stream";
  e.key_hex = HexKey(key);
  Log(std::move(e));
  return std::make_unique<RandomStream>(key);
}

}  // namespace dpsynth
