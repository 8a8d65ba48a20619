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

#include "iod/ledger/digest.h"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <cstring>

#include "iod/ledger/codec.h"

namespace iod::ledger {

Digest Sha256(std::span<const uint8_t> bytes) {
  Digest d;
  SHA256(bytes.data(), bytes.size(), d.data());
  return d;
}

Digest Sha256(std::string_view bytes) {
  return Sha256(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()));
}

Digest Sha256Pair(const Digest& a, const Digest& b) {
  uint8_t buf[64];
  std::memcpy(buf, a.data(), 32);
  std::memcpy(buf + 32, b.data(), 32);
  return Sha256(std::span<const uint8_t>(buf, 64));
}

Digest HmacSha256(std::span<const uint8_t> key, std::string_view message) {
  Digest d;
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
       reinterpret_cast<const unsigned char*>(message.data()), message.size(),
       d.data(), &len);
  return d;
}

std::string ToHex(const Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (uint8_t b : d) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

std::optional<Digest> DigestFromHex(std::string_view hex) {
  if (hex.size() != 64) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Digest d;
  for (size_t i = 0; i < 32; ++i) {
    const int hi = nibble(hex[2 * i]);
    const int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    d[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return d;
}

void Encoder::PutU32(uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) PutU8(static_cast<uint8_t>(v >> s));
}

void Encoder::PutU64(uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) PutU8(static_cast<uint8_t>(v >> s));
}

void Encoder::PutBytes(std::string_view b) {
  PutU32(static_cast<uint32_t>(b.size()));
  out_.append(b);
}

void Encoder::PutDigest(const Digest& d) {
  out_.append(reinterpret_cast<const char*>(d.data()), d.size());
}

bool Decoder::Need(size_t n) {
  if (!ok_ || in_.size() - pos_ < n) {
    ok_ = false;
    return false;
  }
  return true;
}

uint8_t Decoder::GetU8() {
  if (!Need(1)) return 0;
  return static_cast<uint8_t>(in_[pos_++]);
}

uint32_t Decoder::GetU32() {
  if (!Need(4)) return 0;
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = v << 8 | static_cast<uint8_t>(in_[pos_++]);
  return v;
}

uint64_t Decoder::GetU64() {
  if (!Need(8)) return 0;
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | static_cast<uint8_t>(in_[pos_++]);
  return v;
}

std::string_view Decoder::GetBytesView() {
  const uint32_t n = GetU32();
  if (!Need(n)) return {};
  std::string_view v = in_.substr(pos_, n);
  pos_ += n;
  return v;
}

std::string Decoder::GetBytes() { return std::string(GetBytesView()); }

Digest Decoder::GetDigest() {
  Digest d{};
  if (!Need(32)) return d;
  std::memcpy(d.data(), in_.data() + pos_, 32);
  pos_ += 32;
  return d;
}

}  // namespace iod::ledger
