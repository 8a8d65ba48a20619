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

#include "iod/ledger/block.h"

#include <utility>

#include "absl/status/status.h"
#include "iod/ledger/codec.h"
#include "iod/ledger/merkle.h"

namespace iod::ledger {
namespace {

void PutRequest(Encoder& e, const Transaction& tx) {
  e.PutU8(static_cast<uint8_t>(tx.kind));
  e.PutBytes(tx.creator);
  e.PutBytes(tx.contract);
  e.PutBytes(tx.function);
  e.PutBytes(tx.args);
  e.PutU64(tx.nonce);
  e.PutI64(tx.created.micros());
  e.PutU64(tx.attachment_bytes);
}

void PutRwSets(Encoder& e, const Transaction& tx) {
  e.PutU32(static_cast<uint32_t>(tx.read_set.size()));
  for (const ReadEntry& r : tx.read_set) {
    e.PutBytes(r.key);
    e.PutU8(r.version.has_value() ? 1 : 0);
    if (r.version) {
      e.PutU64(r.version->block);
      e.PutU32(r.version->tx_index);
    }
  }
  e.PutU32(static_cast<uint32_t>(tx.write_set.size()));
  for (const WriteEntry& w : tx.write_set) {
    e.PutBytes(w.key);
    e.PutBytes(w.value);
  }
}

void PutTransaction(Encoder& e, const Transaction& tx) {
  e.PutDigest(tx.tx_id);
  PutRequest(e, tx);
  PutRwSets(e, tx);
  e.PutBytes(tx.response);
  e.PutU32(static_cast<uint32_t>(tx.endorsements.size()));
  for (const Endorsement& en : tx.endorsements) {
    e.PutBytes(en.peer);
    e.PutDigest(en.signature);
  }
}

// Counts are bounded by what the remaining input could possibly hold so a
// corrupted count fails fast instead of reserving huge vectors.
bool PlausibleCount(const Decoder& d, uint32_t n, size_t remaining,
                    size_t min_each) {
  return d.ok() && static_cast<uint64_t>(n) * min_each <= remaining;
}

bool GetTransaction(Decoder& d, size_t total, Transaction& tx) {
  tx.tx_id = d.GetDigest();
  const uint8_t kind = d.GetU8();
  if (kind > static_cast<uint8_t>(TxKind::kConfig)) return false;
  tx.kind = static_cast<TxKind>(kind);
  tx.creator = d.GetBytes();
  tx.contract = d.GetBytes();
  tx.function = d.GetBytes();
  tx.args = d.GetBytes();
  tx.nonce = d.GetU64();
  tx.created = SimTime::FromMicros(d.GetI64());
  tx.attachment_bytes = d.GetU64();
  uint32_t n = d.GetU32();
  if (!PlausibleCount(d, n, total - d.position(), 5)) return false;
  tx.read_set.resize(n);
  for (ReadEntry& r : tx.read_set) {
    r.key = d.GetBytes();
    const uint8_t present = d.GetU8();
    if (present > 1) return false;
    if (present) r.version = Version{d.GetU64(), d.GetU32()};
  }
  n = d.GetU32();
  if (!PlausibleCount(d, n, total - d.position(), 8)) return false;
  tx.write_set.resize(n);
  for (WriteEntry& w : tx.write_set) {
    w.key = d.GetBytes();
    w.value = d.GetBytes();
  }
  tx.response = d.GetBytes();
  n = d.GetU32();
  if (!PlausibleCount(d, n, total - d.position(), 36)) return false;
  tx.endorsements.resize(n);
  for (Endorsement& en : tx.endorsements) {
    en.peer = d.GetBytes();
    en.signature = d.GetDigest();
  }
  return d.ok();
}

void PutHeader(Encoder& e, const BlockHeader& h) {
  e.PutU64(h.number);
  e.PutDigest(h.prev_hash);
  e.PutDigest(h.merkle_root);
  e.PutBytes(h.proposer);
  e.PutI64(h.timestamp.micros());
}

}  // namespace

Digest ComputeTxId(const Transaction& tx) {
  Encoder e;
  PutRequest(e, tx);
  return Sha256(e.bytes());
}

std::string EndorsementPayload(const Transaction& tx) {
  Encoder e;
  e.PutDigest(tx.tx_id);
  PutRwSets(e, tx);
  e.PutBytes(tx.response);
  return e.Take();
}

std::string EncodeTransaction(const Transaction& tx) {
  Encoder e;
  PutTransaction(e, tx);
  return e.Take();
}

absl::StatusOr<Transaction> DecodeTransaction(std::string_view bytes) {
  Decoder d(bytes);
  Transaction tx;
  if (!GetTransaction(d, bytes.size(), tx) || !d.done()) {
    return absl::DataLossError("malformed transaction encoding");
  }
  return tx;
}

uint64_t WireSize(const Transaction& tx) {
  return EncodeTransaction(tx).size() + tx.attachment_bytes;
}

std::string_view ValidityFlagName(ValidityFlag f) {
  switch (f) {
    case ValidityFlag::kValid:
      return "Valid";
    case ValidityFlag::kInvalidVersionConflict:
      return "InvalidVersionConflict";
    case ValidityFlag::kInvalidEndorsement:
      return "InvalidEndorsement";
    case ValidityFlag::kDuplicateTxId:
      return "DuplicateTxId";
  }
  return "?";
}

Digest HeaderHash(const BlockHeader& h) {
  Encoder e;
  PutHeader(e, h);
  return Sha256(e.bytes());
}

Digest LeafHash(const Transaction& tx) {
  return Sha256(EncodeTransaction(tx));
}

absl::StatusOr<Digest> TxMerkleRoot(const std::vector<Transaction>& txs) {
  std::vector<Digest> leaves;
  leaves.reserve(txs.size());
  for (const Transaction& tx : txs) leaves.push_back(LeafHash(tx));
  return MerkleRoot(leaves);
}

Digest MetadataHash(const Digest& header_hash,
                    const std::vector<ValidityFlag>& flags) {
  Encoder e;
  e.PutDigest(header_hash);
  e.PutU32(static_cast<uint32_t>(flags.size()));
  for (ValidityFlag f : flags) e.PutU8(static_cast<uint8_t>(f));
  return Sha256(e.bytes());
}

absl::StatusOr<Block> SealBlock(uint64_t number, const Digest& prev_hash,
                                const IdentityId& proposer, SimTime timestamp,
                                std::vector<Transaction> txs) {
  absl::StatusOr<Digest> root = TxMerkleRoot(txs);
  if (!root.ok()) return root.status();
  Block b;
  b.header = {number, prev_hash, *root, proposer, timestamp};
  b.txs = std::move(txs);
  b.header_hash = HeaderHash(b.header);
  return b;
}

std::string EncodeBlock(const Block& b) {
  Encoder e;
  PutHeader(e, b.header);
  e.PutDigest(b.header_hash);
  e.PutU32(static_cast<uint32_t>(b.txs.size()));
  for (const Transaction& tx : b.txs) PutTransaction(e, tx);
  e.PutU32(static_cast<uint32_t>(b.flags.size()));
  for (ValidityFlag f : b.flags) e.PutU8(static_cast<uint8_t>(f));
  e.PutDigest(b.metadata_hash);
  return e.Take();
}

absl::StatusOr<Block> DecodeBlock(std::string_view bytes) {
  Decoder d(bytes);
  Block b;
  b.header.number = d.GetU64();
  b.header.prev_hash = d.GetDigest();
  b.header.merkle_root = d.GetDigest();
  b.header.proposer = d.GetBytes();
  b.header.timestamp = SimTime::FromMicros(d.GetI64());
  b.header_hash = d.GetDigest();
  uint32_t n = d.GetU32();
  bool ok = PlausibleCount(d, n, bytes.size() - d.position(), 64);
  if (ok) {
    b.txs.resize(n);
    for (Transaction& tx : b.txs) {
      if (!GetTransaction(d, bytes.size(), tx)) {
        ok = false;
        break;
      }
    }
  }
  if (ok) {
    n = d.GetU32();
    ok = PlausibleCount(d, n, bytes.size() - d.position(), 1);
  }
  if (ok) {
    b.flags.resize(n);
    for (ValidityFlag& f : b.flags) {
      const uint8_t v = d.GetU8();
      if (v > static_cast<uint8_t>(ValidityFlag::kDuplicateTxId)) {
        ok = false;
        break;
      }
      f = static_cast<ValidityFlag>(v);
    }
  }
  if (ok) b.metadata_hash = d.GetDigest();
  if (!ok || !d.done()) {
    return absl::DataLossError("malformed block encoding");
  }
  return b;
}

}  // namespace iod::ledger
