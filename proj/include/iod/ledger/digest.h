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

#ifndef IOD_LEDGER_DIGEST_H_
#define IOD_LEDGER_DIGEST_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace iod::ledger {

/// A 256-bit SHA-256 digest.
using Digest = std::array<uint8_t, 32>;

inline constexpr Digest kZeroDigest{};

Digest Sha256(std::span<const uint8_t> bytes);
Digest Sha256(std::string_view bytes);
/// SHA-256 over the 64-byte concatenation a || b.
Digest Sha256Pair(const Digest& a, const Digest& b);
Digest HmacSha256(std::span<const uint8_t> key, std::string_view message);

std::string ToHex(const Digest& d);
std::optional<Digest> DigestFromHex(std::string_view hex);

}  // namespace iod::ledger

#endif  // IOD_LEDGER_DIGEST_H_
