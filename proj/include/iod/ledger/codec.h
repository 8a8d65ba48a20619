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

#ifndef IOD_LEDGER_CODEC_H_
#define IOD_LEDGER_CODEC_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "iod/ledger/digest.h"

namespace iod::ledger {

/// Canonical encoding used for every hashed or exported structure:
/// big-endian fixed-width integers, u32 length prefix before variable
/// byte strings, raw 32 bytes for digests. Fields are written in
/// declaration order with no padding or tags.
class Encoder {
 public:
  void PutU8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void PutU32(uint32_t v);
  void PutU64(uint64_t v);
  void PutI64(int64_t v) { PutU64(static_cast<uint64_t>(v)); }
  void PutBytes(std::string_view b);
  void PutDigest(const Digest& d);

  const std::string& bytes() const { return out_; }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

/// Reads what Encoder writes. Any read past the end or inconsistent length
/// marks the decoder failed; callers check ok() once at the end.
class Decoder {
 public:
  explicit Decoder(std::string_view in) : in_(in) {}

  uint8_t GetU8();
  uint32_t GetU32();
  uint64_t GetU64();
  int64_t GetI64() { return static_cast<int64_t>(GetU64()); }
  std::string GetBytes();
  std::string_view GetBytesView();
  Digest GetDigest();

  bool ok() const { return ok_; }
  bool done() const { return ok_ && pos_ == in_.size(); }
  size_t position() const { return pos_; }
  void Fail() { ok_ = false; }

 private:
  bool Need(size_t n);

  std::string_view in_;
  size_t pos_ = 0;
  bool ok_ = true;
};

}  // namespace iod::ledger

#endif  // IOD_LEDGER_CODEC_H_
