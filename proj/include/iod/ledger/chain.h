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

#ifndef IOD_LEDGER_CHAIN_H_
#define IOD_LEDGER_CHAIN_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "iod/ledger/block.h"
#include "iod/ledger/identity.h"
#include "iod/ledger/world_state.h"

namespace iod::ledger {

/// Validation flags for `block` against the state before it. A transaction
/// is checked for a repeated id, then the endorsement policy, then that every
/// read version still matches the state including earlier Valid
/// transactions of the same block.
std::vector<ValidityFlag> ValidateBlock(const Block& block,
                                        const WorldState& state,
                                        const std::set<Digest>& seen_tx_ids,
                                        const IdentityRegistry& registry,
                                        const EndorsementPolicy& policy);

/// A peer's copy of the chain and the state derived from it.
class Ledger {
 public:
  /// Starts from a genesis block produced by MakeGenesisBlock.
  static absl::StatusOr<Ledger> Create(const Block& genesis);

  /// Checks the link to the tip ("NonConsecutive", "BadPrevHash"), the
  /// header hash and Merkle root ("BadRoot"), then validates, flags and
  /// applies the block.
  absl::Status Append(Block block);

  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& tip() const { return blocks_.back(); }
  uint64_t height() const { return blocks_.size(); }
  const WorldState& state() const { return state_; }
  const IdentityRegistry& registry() const { return registry_; }
  const EndorsementPolicy& policy() const { return policy_; }
  bool HasTx(const Digest& tx_id) const { return seen_.contains(tx_id); }

 private:
  Ledger(IdentityRegistry registry, EndorsementPolicy policy)
      : registry_(std::move(registry)), policy_(std::move(policy)) {}

  IdentityRegistry registry_;
  EndorsementPolicy policy_;
  std::vector<Block> blocks_;
  WorldState state_;
  std::set<Digest> seen_;
};

enum class BadBlockReason {
  kDecode,
  kBadGenesis,
  kBadHeaderHash,
  kNonConsecutive,
  kBadPrevHash,
  kEmptyBlock,
  kBadRoot,
  kBadMetadata,
  kBadFlags,
};

std::string_view BadBlockReasonName(BadBlockReason r);

struct VerifyReport {
  bool ok = true;
  uint64_t blocks_checked = 0;
  // Set when !ok: the position of the first bad block (which is the number
  // it should carry) and why it failed.
  uint64_t bad_block = 0;
  BadBlockReason reason = BadBlockReason::kDecode;
  std::string detail;
};

/// Incremental re-walk of a chain from genesis. Each block is checked for
/// its header hash, number, predecessor link, Merkle root and metadata
/// hash, and its flags are recomputed by replaying validation.
class ChainVerifier {
 public:
  /// Returns false once a bad block has been seen; further input is ignored.
  bool Feed(const Block& block);
  /// Marks the next expected block as undecodable.
  void FeedDecodeFailure(std::string detail);

  const VerifyReport& report() const { return report_; }

 private:
  bool Fail(BadBlockReason reason, std::string detail);

  VerifyReport report_;
  std::optional<IdentityRegistry> registry_;
  EndorsementPolicy policy_;
  WorldState state_;
  std::set<Digest> seen_;
  Digest prev_hash_{};
};

VerifyReport VerifyChain(const std::vector<Block>& blocks);

/// Binary export: the 8-byte magic followed by one u32-length-prefixed
/// block encoding per block.
inline constexpr std::string_view kExportMagic = "IODLEDG1";

std::string ExportChain(const std::vector<Block>& blocks);
/// JSON index of an export: offset, length, hash and tx count per block.
std::string ExportIndexJson(const std::vector<Block>& blocks);

/// Walks an export and verifies it. Framing or decoding trouble is reported
/// against the block position where it occurs.
VerifyReport VerifyExport(std::string_view bytes);

absl::StatusOr<std::vector<Block>> ImportChain(std::string_view bytes);

/// Writes `<path>` and `<path>.index.json`.
absl::Status WriteExportFiles(const std::string& path,
                              const std::vector<Block>& blocks);

}  // namespace iod::ledger

#endif  // IOD_LEDGER_CHAIN_H_
