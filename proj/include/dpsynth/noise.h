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

#ifndef DPSYNTH_NOISE_H_
#define DPSYNTH_NOISE_H_

#include <array>
#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"

namespace dpsynth {

// One logged draw. Uniform-valued draws keep their raw 64 random bits so a
// transcript replays bit for bit; stream draws keep the key of the stream.
struct TranscriptEntry {
  uint64_t seq = 0;
  std::string purpose;
  std::string kind;  // "uniform", "laplace", or "stream"
  double scale = 0.0;
  double value = 0.0;
  uint64_t raw = 0;
  std::string key_hex;

  std::string ToJsonLine() const;
  static absl::StatusOr<TranscriptEntry> FromJsonLine(const std::string& line);
};

class TranscriptSink {
 public:
  virtual ~TranscriptSink() = default;
  virtual void Append(const TranscriptEntry& entry) = 0;
};

class MemoryTranscript : public TranscriptSink {
 public:
  void Append(const TranscriptEntry& entry) override {
    entries_.push_back(entry);
  }
  const std::vector<TranscriptEntry>& entries() const { return entries_; }

 private:
  std::vector<TranscriptEntry> entries_;
};

// Line-delimited JSON; meant to live inside the private directory.
class FileTranscript : public TranscriptSink {
 public:
  static absl::StatusOr<std::unique_ptr<FileTranscript>> Open(
      const std::string& path);
  void Append(const TranscriptEntry& entry) override;

 private:
  explicit FileTranscript(std::ofstream out) : out_(std::move(out)) {}
  std::ofstream out_;
};

// Discards everything; only for public-data tuning.
class NullTranscript : public TranscriptSink {
 public:
  void Append(const TranscriptEntry&) override {}
};

absl::StatusOr<std::vector<TranscriptEntry>> ReadTranscript(
    const std::string& path);

// Source of raw random bits.
class RandomBackend {
 public:
  virtual ~RandomBackend() = default;
  virtual uint64_t Next64(std::string_view purpose, std::string_view kind) = 0;
  virtual std::array<uint8_t, 32> NextKey(std::string_view purpose) = 0;
  virtual absl::Status status() const { return absl::OkStatus(); }
};

// Unlogged ChaCha20 keystream for bulk draws. The key itself is drawn from
// a NoiseSource and logged there, so every bulk draw is reproducible.
class RandomStream {
 public:
  explicit RandomStream(const std::array<uint8_t, 32>& key);

  uint64_t Next64();
  // Uniform on the open interval (0, 1).
  double Uniform();
  // Uniform integer in [0, n).
  uint64_t UniformInt(uint64_t n);
  double Laplace(double scale);
  // Index drawn proportionally to non-negative `weights`.
  size_t Categorical(absl::Span<const double> weights);

 private:
  void Refill();

  std::array<uint8_t, 32> key_;
  std::array<uint8_t, 8> nonce_{};
  std::array<uint8_t, 512> buffer_;
  uint64_t block_ = 0;
  size_t pos_ = 512;
};

enum class NoiseMode { kSystem, kSeeded, kReplay };

struct NoiseOptions {
  NoiseMode mode = NoiseMode::kSystem;
  // Release runs set this; seeded and replayed randomness is then refused.
  bool production = true;
  uint64_t seed = 0;
  std::vector<TranscriptEntry> replay;
};

// Logged randomness for DP mechanisms.
class NoiseSource {
 public:
  static absl::StatusOr<std::unique_ptr<NoiseSource>> Create(
      NoiseOptions options, TranscriptSink* sink);
  // Seeded source for tests and public-data tuning.
  static std::unique_ptr<NoiseSource> ForTesting(uint64_t seed,
                                                 TranscriptSink* sink = nullptr);

  double Uniform(std::string_view purpose);
  double Laplace(double scale, std::string_view purpose);
  bool Bernoulli(double p, std::string_view purpose);
  uint64_t UniformInt(uint64_t n, std::string_view purpose);
  size_t Categorical(absl::Span<const double> weights,
                     std::string_view purpose);
  // Draws index i with probability proportional to
  // exp(epsilon * scores[i] / (2 * sensitivity)).
  size_t ExponentialMechanism(absl::Span<const double> scores, double epsilon,
                              double sensitivity, std::string_view purpose);
  // Keyed bulk stream; the key is logged under `purpose`.
  std::unique_ptr<RandomStream> Stream(std::string_view purpose);

  NoiseMode mode() const { return mode_; }
  uint64_t draws() const { return seq_; }
  // Non-OK when a replayed transcript did not match the requested draws.
  absl::Status status() const { return backend_->status(); }

 private:
  NoiseSource(std::unique_ptr<RandomBackend> backend, NoiseMode mode,
              TranscriptSink* sink)
      : backend_(std::move(backend)), mode_(mode), sink_(sink) {}
  void Log(TranscriptEntry entry);

  std::unique_ptr<RandomBackend> backend_;
  NoiseMode mode_;
  TranscriptSink* sink_;
  uint64_t seq_ = 0;
};

// Maps 64 random bits to the open interval (0, 1).
double BitsToUniform(uint64_t bits);
// Inverse CDF of the centered Laplace distribution.
double LaplaceFromUniform(double u, double scale);

}  // namespace dpsynth

#endif  // DPSYNTH_NOISE_H_
