// Copyright 2026 The IoD-SAR Simulator Authors
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

#ifndef IOD_SIM_RANDOM_H_
#define IOD_SIM_RANDOM_H_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"

namespace iod {

/// 64-bit FNV-1a; used to fold stream labels into seeds.
uint64_t Fnv1a64(std::string_view bytes);

/// A labelled, independently seeded xoshiro256** generator.
///
/// The state is initialised by running SplitMix64 from
/// `master_seed ^ Fnv1a64(stream_key)`, so a (seed, key) pair yields the same
/// sequence on every platform and every implementation of this algorithm.
class RandomStream {
 public:
  RandomStream(uint64_t master_seed, std::string stream_key);

  const std::string& key() const { return key_; }

  uint64_t NextU64();
  /// Uniform in [0, 1) with 53 bits of precision.
  double NextUniform();
  /// Uniform in [lo, hi].
  double NextUniformIn(double lo, double hi);
  bool NextBernoulli(double p);

 private:
  std::string key_;
  std::array<uint64_t, 4> s_{};
};

/// Registry of named streams belonging to one simulation run.
class RandomStreams {
 public:
  explicit RandomStreams(uint64_t master_seed) : master_seed_(master_seed) {}

  uint64_t master_seed() const { return master_seed_; }

  /// Registers `key` (no-op when already present) and returns the stream.
  RandomStream& Register(const std::string& key);
  /// Returns nullptr for an unregistered key.
  RandomStream* Find(const std::string& key);

  /// Fails with NotFound ("UnknownStream") when `key` was never registered.
  absl::StatusOr<double> NextUniform(const std::string& key);

 private:
  uint64_t master_seed_;
  std::map<std::string, RandomStream, std::less<>> streams_;
};

}  // namespace iod

#endif  // IOD_SIM_RANDOM_H_
