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

#include "iod/ledger/identity.h"

#include <set>

#include "absl/strings/str_cat.h"
#include "iod/ledger/codec.h"
#include "json.hpp"

namespace iod::ledger {

std::string_view IdentityRoleName(IdentityRole r) {
  switch (r) {
    case IdentityRole::kOrderer:
      return "orderer";
    case IdentityRole::kPeer:
      return "peer";
    case IdentityRole::kClient:
      return "client";
  }
  return "?";
}

absl::StatusOr<IdentityRole> ParseIdentityRole(std::string_view s) {
  if (s == "orderer") return IdentityRole::kOrderer;
  if (s == "peer") return IdentityRole::kPeer;
  if (s == "client") return IdentityRole::kClient;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown role '", std::string(s), "'"));
}

absl::Status IdentityRegistry::Register(const IdentityId& id,
                                        IdentityRole role) {
  if (id.empty()) return absl::InvalidArgumentError("empty identity");
  auto [it, inserted] = ids_.emplace(id, role);
  if (!inserted && it->second != role) {
    return absl::AlreadyExistsError(
        absl::StrCat("identity '", id, "' already registered"));
  }
  return absl::OkStatus();
}

absl::StatusOr<IdentityRole> IdentityRegistry::RoleOf(
    const IdentityId& id) const {
  auto it = ids_.find(id);
  if (it == ids_.end()) {
    return absl::NotFoundError(absl::StrCat("UnknownIdentity: ", id));
  }
  return it->second;
}

Digest IdentityRegistry::KeyFor(const IdentityId& id) const {
  Encoder e;
  e.PutBytes("iod-identity-key");
  e.PutU64(key_seed_);
  e.PutBytes(id);
  return Sha256(e.bytes());
}

absl::StatusOr<Digest> IdentityRegistry::Sign(const IdentityId& id,
                                              std::string_view message) const {
  if (!Contains(id)) {
    return absl::NotFoundError(absl::StrCat("UnknownIdentity: ", id));
  }
  return HmacSha256(KeyFor(id), message);
}

bool IdentityRegistry::Verify(const IdentityId& id, std::string_view message,
                              const Digest& signature) const {
  if (!Contains(id)) return false;
  return HmacSha256(KeyFor(id), message) == signature;
}

bool SatisfiesPolicy(const Transaction& tx, const EndorsementPolicy& policy,
                     const IdentityRegistry& registry) {
  const std::string payload = EndorsementPayload(tx);
  std::set<IdentityId> good;
  for (const Endorsement& e : tx.endorsements) {
    bool listed = false;
    for (const IdentityId& id : policy.endorsers) listed |= id == e.peer;
    if (listed && registry.Verify(e.peer, payload, e.signature)) {
      good.insert(e.peer);
    }
  }
  return good.size() >= policy.threshold;
}

std::string EncodeGenesisConfig(const GenesisConfig& cfg) {
  nlohmann::json j;
  j["key_seed"] = cfg.key_seed;
  nlohmann::json ids = nlohmann::json::object();
  for (const auto& [id, role] : cfg.identities) {
    ids[id] = std::string(IdentityRoleName(role));
  }
  j["identities"] = ids;
  j["policy"] = {{"endorsers", cfg.policy.endorsers},
                 {"threshold", cfg.policy.threshold}};
  return j.dump();
}

absl::StatusOr<GenesisConfig> DecodeGenesisConfig(std::string_view json) {
  const nlohmann::json j = nlohmann::json::parse(json, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::DataLossError("genesis config is not a JSON object");
  }
  GenesisConfig cfg;
  try {
    cfg.key_seed = j.at("key_seed").get<uint64_t>();
    for (const auto& [id, role] : j.at("identities").items()) {
      absl::StatusOr<IdentityRole> r =
          ParseIdentityRole(role.get<std::string>());
      if (!r.ok()) return r.status();
      cfg.identities[id] = *r;
    }
    cfg.policy.endorsers =
        j.at("policy").at("endorsers").get<std::vector<IdentityId>>();
    cfg.policy.threshold = j.at("policy").at("threshold").get<uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    return absl::DataLossError(absl::StrCat("genesis config: ", e.what()));
  }
  return cfg;
}

absl::StatusOr<IdentityRegistry> RegistryFromConfig(const GenesisConfig& cfg) {
  IdentityRegistry reg(cfg.key_seed);
  for (const auto& [id, role] : cfg.identities) {
    if (absl::Status s = reg.Register(id, role); !s.ok()) return s;
  }
  if (cfg.policy.threshold == 0 ||
      cfg.policy.threshold > cfg.policy.endorsers.size()) {
    return absl::InvalidArgumentError("endorsement threshold out of range");
  }
  for (const IdentityId& id : cfg.policy.endorsers) {
    absl::StatusOr<IdentityRole> r = reg.RoleOf(id);
    if (!r.ok()) return r.status();
    if (*r != IdentityRole::kPeer) {
      return absl::InvalidArgumentError(
          absl::StrCat("endorser '", id, "' is not a peer"));
    }
  }
  return reg;
}

absl::StatusOr<Block> MakeGenesisBlock(const GenesisConfig& cfg) {
  if (absl::StatusOr<IdentityRegistry> r = RegistryFromConfig(cfg); !r.ok()) {
    return r.status();
  }
  Transaction tx;
  tx.kind = TxKind::kConfig;
  tx.creator = "genesis";
  tx.contract = "config";
  tx.function = "genesis";
  tx.args = EncodeGenesisConfig(cfg);
  tx.tx_id = ComputeTxId(tx);
  absl::StatusOr<Block> b =
      SealBlock(0, kZeroDigest, "genesis", SimTime::Zero(), {std::move(tx)});
  if (!b.ok()) return b.status();
  b->flags = {ValidityFlag::kValid};
  b->metadata_hash = MetadataHash(b->header_hash, b->flags);
  return b;
}

}  // namespace iod::ledger
