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

#include "iod/ledger/chain.h"

#include <fstream>
#include <map>
#include <utility>

#include "absl/strings/str_cat.h"
#include "iod/ledger/codec.h"
#include "json.hpp"

namespace iod::ledger {

std::vector<ValidityFlag> ValidateBlock(const Block& block,
                                        const WorldState& state,
                                        const std::set<Digest>& seen_tx_ids,
                                        const IdentityRegistry& registry,
                                        const EndorsementPolicy& policy) {
  std::vector<ValidityFlag> flags;
  flags.reserve(block.txs.size());
  std::set<Digest> in_block;
  // Versions written by earlier Valid transactions of this block.
  std::map<std::string, Version> overlay;
  for (uint32_t i = 0; i < block.txs.size(); ++i) {
    const Transaction& tx = block.txs[i];
    ValidityFlag flag = ValidityFlag::kValid;
    if (seen_tx_ids.contains(tx.tx_id) || in_block.contains(tx.tx_id)) {
      flag = ValidityFlag::kDuplicateTxId;
    } else if (tx.kind != TxKind::kInvoke || ComputeTxId(tx) != tx.tx_id ||
               !SatisfiesPolicy(tx, policy, registry)) {
      flag = ValidityFlag::kInvalidEndorsement;
    } else {
      for (const ReadEntry& r : tx.read_set) {
        std::optional<Version> current;
        if (auto it = overlay.find(r.key); it != overlay.end()) {
          current = it->second;
        } else if (auto v = state.Get(r.key)) {
          current = v->version;
        }
        if (current != r.version) {
          flag = ValidityFlag::kInvalidVersionConflict;
          break;
        }
      }
    }
    in_block.insert(tx.tx_id);
    if (flag == ValidityFlag::kValid) {
      for (const WriteEntry& w : tx.write_set) {
        overlay[w.key] = Version{block.header.number, i};
      }
    }
    flags.push_back(flag);
  }
  return flags;
}

absl::StatusOr<Ledger> Ledger::Create(const Block& genesis) {
  ChainVerifier check;
  if (!check.Feed(genesis)) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad genesis: ", check.report().detail));
  }
  absl::StatusOr<GenesisConfig> cfg = DecodeGenesisConfig(genesis.txs[0].args);
  if (!cfg.ok()) return cfg.status();
  absl::StatusOr<IdentityRegistry> reg = RegistryFromConfig(*cfg);
  if (!reg.ok()) return reg.status();
  Ledger ledger(std::move(*reg), cfg->policy);
  if (absl::Status s = ledger.state_.Apply(genesis); !s.ok()) return s;
  ledger.seen_.insert(genesis.txs[0].tx_id);
  ledger.blocks_.push_back(genesis);
  return ledger;
}

absl::Status Ledger::Append(Block block) {
  const uint64_t expected = blocks_.size();
  if (block.header.number != expected) {
    return absl::FailedPreconditionError(
        absl::StrCat("NonConsecutive: expected block ", expected, ", got ",
                     block.header.number));
  }
  if (block.header.prev_hash != tip().header_hash) {
    return absl::FailedPreconditionError(
        absl::StrCat("BadPrevHash: block ", expected));
  }
  absl::StatusOr<Digest> root = TxMerkleRoot(block.txs);
  if (!root.ok()) return root.status();
  if (*root != block.header.merkle_root) {
    return absl::FailedPreconditionError(
        absl::StrCat("BadRoot: block ", expected));
  }
  if (HeaderHash(block.header) != block.header_hash) {
    return absl::FailedPreconditionError(
        absl::StrCat("BadRoot: header hash of block ", expected));
  }
  block.flags = ValidateBlock(block, state_, seen_, registry_, policy_);
  block.metadata_hash = MetadataHash(block.header_hash, block.flags);
  if (absl::Status s = state_.Apply(block); !s.ok()) return s;
  for (const Transaction& tx : block.txs) seen_.insert(tx.tx_id);
  blocks_.push_back(std::move(block));
  return absl::OkStatus();
}

std::string_view BadBlockReasonName(BadBlockReason r) {
  switch (r) {
    case BadBlockReason::kDecode:
      return "Decode";
    case BadBlockReason::kBadGenesis:
      return "BadGenesis";
    case BadBlockReason::kBadHeaderHash:
      return "BadHeaderHash";
    case BadBlockReason::kNonConsecutive:
      return "NonConsecutive";
    case BadBlockReason::kBadPrevHash:
      return "BadPrevHash";
    case BadBlockReason::kEmptyBlock:
      return "EmptyBlock";
    case BadBlockReason::kBadRoot:
      return "BadRoot";
    case BadBlockReason::kBadMetadata:
      return "BadMetadata";
    case BadBlockReason::kBadFlags:
      return "BadFlags";
  }
  return "?";
}

bool ChainVerifier::Fail(BadBlockReason reason, std::string detail) {
  report_.ok = false;
  report_.bad_block = report_.blocks_checked;
  report_.reason = reason;
  report_.detail = std::move(detail);
  return false;
}

void ChainVerifier::FeedDecodeFailure(std::string detail) {
  if (report_.ok) Fail(BadBlockReason::kDecode, std::move(detail));
}

bool ChainVerifier::Feed(const Block& block) {
  if (!report_.ok) return false;
  const uint64_t expected = report_.blocks_checked;
  if (HeaderHash(block.header) != block.header_hash) {
    return Fail(BadBlockReason::kBadHeaderHash, "header hash mismatch");
  }
  if (block.header.number != expected) {
    return Fail(BadBlockReason::kNonConsecutive,
                absl::StrCat("carries number ", block.header.number));
  }
  if (block.header.prev_hash != prev_hash_) {
    return Fail(BadBlockReason::kBadPrevHash, "predecessor hash mismatch");
  }
  if (block.txs.empty()) return Fail(BadBlockReason::kEmptyBlock, "no txs");
  absl::StatusOr<Digest> root = TxMerkleRoot(block.txs);
  if (!root.ok() || *root != block.header.merkle_root) {
    return Fail(BadBlockReason::kBadRoot, "merkle root mismatch");
  }
  if (MetadataHash(block.header_hash, block.flags) != block.metadata_hash) {
    return Fail(BadBlockReason::kBadMetadata, "metadata hash mismatch");
  }
  std::vector<ValidityFlag> flags;
  if (expected == 0) {
    const Transaction& tx = block.txs[0];
    if (block.txs.size() != 1 || tx.kind != TxKind::kConfig) {
      return Fail(BadBlockReason::kBadGenesis, "expected one config tx");
    }
    absl::StatusOr<GenesisConfig> cfg = DecodeGenesisConfig(tx.args);
    if (!cfg.ok()) return Fail(BadBlockReason::kBadGenesis, cfg.status().ToString());
    absl::StatusOr<IdentityRegistry> reg = RegistryFromConfig(*cfg);
    if (!reg.ok()) return Fail(BadBlockReason::kBadGenesis, reg.status().ToString());
    registry_ = std::move(*reg);
    policy_ = cfg->policy;
    flags = {ValidityFlag::kValid};
  } else {
    flags = ValidateBlock(block, state_, seen_, *registry_, policy_);
  }
  if (flags != block.flags) {
    return Fail(BadBlockReason::kBadFlags, "validity flags do not replay");
  }
  // Flags match the replay, so Apply cannot fail here.
  (void)state_.Apply(block);
  for (const Transaction& tx : block.txs) seen_.insert(tx.tx_id);
  prev_hash_ = block.header_hash;
  ++report_.blocks_checked;
  return true;
}

VerifyReport VerifyChain(const std::vector<Block>& blocks) {
  ChainVerifier v;
  for (const Block& b : blocks) {
    if (!v.Feed(b)) break;
  }
  return v.report();
}

std::string ExportChain(const std::vector<Block>& blocks) {
  Encoder e;
  std::string out(kExportMagic);
  for (const Block& b : blocks) e.PutBytes(EncodeBlock(b));
  out += e.bytes();
  return out;
}

std::string ExportIndexJson(const std::vector<Block>& blocks) {
  nlohmann::json index = nlohmann::json::array();
  uint64_t offset = kExportMagic.size();
  for (const Block& b : blocks) {
    const uint64_t len = EncodeBlock(b).size();
    index.push_back({{"number", b.header.number},
                     {"offset", offset},
                     {"length", len},
                     {"header_hash", ToHex(b.header_hash)},
                     {"tx_count", b.txs.size()}});
    offset += 4 + len;
  }
  nlohmann::json j = {{"format", std::string(kExportMagic)},
                      {"blocks", index}};
  return j.dump(2) + "\n";
}

namespace {

// Calls `fn(position, frame)` for each frame; returns false with `error`
// set when the framing breaks at `position`.
template <typename Fn>
bool WalkFrames(std::string_view bytes, uint64_t& position, std::string& error,
                Fn fn) {
  position = 0;
  if (bytes.substr(0, kExportMagic.size()) != kExportMagic) {
    error = "missing export magic";
    return false;
  }
  Decoder d(bytes.substr(kExportMagic.size()));
  while (!d.done()) {
    std::string_view frame = d.GetBytesView();
    if (!d.ok()) {
      error = "truncated frame";
      return false;
    }
    if (!fn(frame)) return true;
    ++position;
  }
  return true;
}

}  // namespace

VerifyReport VerifyExport(std::string_view bytes) {
  ChainVerifier v;
  uint64_t position = 0;
  std::string error;
  const bool framed = WalkFrames(bytes, position, error,
                                 [&](std::string_view frame) {
                                   absl::StatusOr<Block> b = DecodeBlock(frame);
                                   if (!b.ok()) {
                                     v.FeedDecodeFailure(
                                         std::string(b.status().message()));
                                     return false;
                                   }
                                   return v.Feed(*b);
                                 });
  if (!framed) v.FeedDecodeFailure(error);
  return v.report();
}

absl::StatusOr<std::vector<Block>> ImportChain(std::string_view bytes) {
  std::vector<Block> blocks;
  absl::Status status;
  uint64_t position = 0;
  std::string error;
  const bool framed =
      WalkFrames(bytes, position, error, [&](std::string_view frame) {
        absl::StatusOr<Block> b = DecodeBlock(frame);
        if (!b.ok()) {
          status = b.status();
          return false;
        }
        blocks.push_back(std::move(*b));
        return true;
      });
  if (!framed) {
    return absl::DataLossError(absl::StrCat(error, " at block ", position));
  }
  if (!status.ok()) {
    return absl::DataLossError(
        absl::StrCat(status.message(), " at block ", position));
  }
  return blocks;
}

absl::Status WriteExportFiles(const std::string& path,
                              const std::vector<Block>& blocks) {
  std::ofstream bin(path, std::ios::binary | std::ios::trunc);
  std::ofstream idx(path + ".index.json", std::ios::trunc);
  if (!bin || !idx) {
    return absl::UnavailableError(absl::StrCat("cannot write ", path));
  }
  const std::string data = ExportChain(blocks);
  bin.write(data.data(), static_cast<std::streamsize>(data.size()));
  idx << ExportIndexJson(blocks);
  if (!bin || !idx) return absl::DataLossError("short write");
  return absl::OkStatus();
}

}  // namespace iod::ledger
