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

#include "iod/ledger/world_state.h"

#include "absl/strings/str_cat.h"
#include "iod/ledger/codec.h"

namespace iod::ledger {

std::optional<VersionedValue> WorldState::Get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

absl::Status WorldState::Apply(const Block& block) {
  if (block.header.number != next_block_) {
    return absl::FailedPreconditionError(
        absl::StrCat("OutOfOrderApply: expected block ", next_block_, ", got ",
                     block.header.number));
  }
  if (block.flags.size() != block.txs.size()) {
    return absl::FailedPreconditionError(
        absl::StrCat("block ", block.header.number, " is not flagged"));
  }
  for (uint32_t i = 0; i < block.txs.size(); ++i) {
    if (block.flags[i] != ValidityFlag::kValid) continue;
    for (const WriteEntry& w : block.txs[i].write_set) {
      entries_[w.key] = {w.value, Version{block.header.number, i}};
    }
  }
  ++next_block_;
  return absl::OkStatus();
}

std::string WorldState::Snapshot() const {
  Encoder e;
  e.PutU64(next_block_);
  e.PutU32(static_cast<uint32_t>(entries_.size()));
  for (const auto& [key, v] : entries_) {
    e.PutBytes(key);
    e.PutBytes(v.value);
    e.PutU64(v.version.block);
    e.PutU32(v.version.tx_index);
  }
  return e.Take();
}

}  // namespace iod::ledger
