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

#include "iod/sim/random.h"

#include <string>
#include <utility>

#include "absl/status/status.h"

namespace iod {
namespace {

uint64_t SplitMix64(uint64_t& x) {
  uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RandomStream::RandomStream(uint64_t master_seed, std::string stream_key)
    : key_(std::move(stream_key)) {
  uint64_t x = master_seed ^ Fnv1a64(key_);
  for (auto& word : s_) word = SplitMix64(x);
}

uint64_t RandomStream::NextU64() {
  const uint64_t result = Rotl(s_[1] * 5, 7) * 9;
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = Rotl(s_[3], 45);
  return result;
}

double RandomStream::NextUniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double RandomStream::NextUniformIn(double lo, double hi) {
  return lo + (hi - lo) * NextUniform();
}

bool RandomStream::NextBernoulli(double p) {
  if (p <= 0) return false;
  if (p >= 1) return true;
  return NextUniform() < p;
}

RandomStream& RandomStreams::Register(const std::string& key) {
  auto it = streams_.find(key);
  if (it == streams_.end()) {
    it = streams_.emplace(key, RandomStream(master_seed_, key)).first;
  }
  return it->second;
}

RandomStream* RandomStreams::Find(const std::string& key) {
  auto it = streams_.find(key);
  return it == streams_.end() ? nullptr : &it->second;
}

absl::StatusOr<double> RandomStreams::NextUniform(const std::string& key) {
  RandomStream* s = Find(key);
  if (s == nullptr) {
    return absl::NotFoundError("UnknownStream: " + key);
  }
  return s->NextUniform();
}

}  // namespace iod
