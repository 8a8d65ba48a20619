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

#ifndef IOD_LEDGER_BLOCK_H_
#define IOD_LEDGER_BLOCK_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "iod/ledger/digest.h"
#include "iod/sim/time.h"

namespace iod::ledger {

using IdentityId = std::string;

enum class TxKind : uint8_t {
  kInvoke = 0,
  kQuery = 1,
  // Only in the genesis block: identities and endorsement policy.
  kConfig = 2,
};

/// Position of the write that produced a state value.
struct Version {
  uint64_t block = 0;
  uint32_t tx_index = 0;

  auto operator<=>(const Version&) const = default;
};

/// A key read during simulation and the version observed; nullopt means the
/// key was absent.
struct ReadEntry {
  std::string key;
  std::optional<Version> version;

  bool operator==(const ReadEntry&) const = default;
};

struct WriteEntry {
  std::string key;
  std::string value;

  bool operator==(const WriteEntry&) const = default;
};

struct Endorsement {
  IdentityId peer;
  Digest signature{};

  bool operator==(const Endorsement&) const = default;
};

struct Transaction {
  TxKind kind = TxKind::kInvoke;
  Digest tx_id{};
  IdentityId creator;
  std::string contract;
  std::string function;
  std::string args;
  uint64_t nonce = 0;
  SimTime created;
  // Size of the opaque payload (image blob, query result) the request
  // carries on the wire. Only its length matters to the model.
  uint64_t attachment_bytes = 0;
  std::vector<ReadEntry> read_set;
  std::vector<WriteEntry> write_set;
  std::string response;
  std::vector<Endorsement> endorsements;

  bool operator==(const Transaction&) const = default;
};

/// Digest over the request fields (kind through attachment_bytes).
Digest ComputeTxId(const Transaction& tx);

/// Bytes each endorser signs: tx id, read set, write set and response.
std::string EndorsementPayload(const Transaction& tx);

std::string EncodeTransaction(const Transaction& tx);
absl::StatusOr<Transaction> DecodeTransaction(std::string_view bytes);

/// Bytes the transaction occupies on the wire and in a batch.
uint64_t WireSize(const Transaction& tx);

enum class ValidityFlag : uint8_t {
  kValid = 0,
  kInvalidVersionConflict = 1,
  kInvalidEndorsement = 2,
  kDuplicateTxId = 3,
};

std::string_view ValidityFlagName(ValidityFlag f);

struct BlockHeader {
  uint64_t number = 0;
  Digest prev_hash{};
  Digest merkle_root{};
  IdentityId proposer;
  SimTime timestamp;

  bool operator==(const BlockHeader&) const = default;
};

Digest HeaderHash(const BlockHeader& h);

/// A block as stored by a peer. `header_hash` is fixed when the orderer
/// seals the block; `flags` and `metadata_hash` are filled at commit.
struct Block {
  BlockHeader header;
  std::vector<Transaction> txs;
  std::vector<ValidityFlag> flags;
  Digest header_hash{};
  Digest metadata_hash{};

  bool operator==(const Block&) const = default;
};

Digest LeafHash(const Transaction& tx);
absl::StatusOr<Digest> TxMerkleRoot(const std::vector<Transaction>& txs);

/// Digest binding the commit-time flags to the sealed header.
Digest MetadataHash(const Digest& header_hash,
                    const std::vector<ValidityFlag>& flags);

/// Builds header, Merkle root and header hash. Flags stay empty.
absl::StatusOr<Block> SealBlock(uint64_t number, const Digest& prev_hash,
                                const IdentityId& proposer, SimTime timestamp,
                                std::vector<Transaction> txs);

std::string EncodeBlock(const Block& b);
absl::StatusOr<Block> DecodeBlock(std::string_view bytes);

}  // namespace iod::ledger

#endif  // IOD_LEDGER_BLOCK_H_
