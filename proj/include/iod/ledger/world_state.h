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

#ifndef IOD_LEDGER_WORLD_STATE_H_
#define IOD_LEDGER_WORLD_STATE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "absl/status/status.h"
#include "iod/ledger/block.h"

namespace iod::ledger {

struct VersionedValue {
  std::string value;
  Version version;

  bool operator==(const VersionedValue&) const = default;
};

/// Versioned key-value view built from the Valid writes of committed blocks.
class WorldState {
 public:
  std::optional<VersionedValue> Get(const std::string& key) const;

  /// Applies the Valid transactions of `block`. The block must be the next
  /// one ("OutOfOrderApply" otherwise) and carry one flag per transaction.
  absl::Status Apply(const Block& block);

  /// Number of the next block Apply expects.
  uint64_t next_block() const { return next_block_; }
  const std::map<std::string, VersionedValue>& entries() const {
    return entries_;
  }

  /// Canonical bytes of the whole state, for equality across peers.
  std::string Snapshot() const;

  bool operator==(const WorldState&) const = default;

 private:
  std::map<std::string, VersionedValue> entries_;
  uint64_t next_block_ = 0;
};

}  // namespace iod::ledger

#endif  // IOD_LEDGER_WORLD_STATE_H_
