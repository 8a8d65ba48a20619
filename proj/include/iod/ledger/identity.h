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

#ifndef IOD_LEDGER_IDENTITY_H_
#define IOD_LEDGER_IDENTITY_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "iod/ledger/block.h"
#include "iod/ledger/digest.h"

namespace iod::ledger {

enum class IdentityRole : uint8_t { kOrderer, kPeer, kClient };

std::string_view IdentityRoleName(IdentityRole r);
absl::StatusOr<IdentityRole> ParseIdentityRole(std::string_view s);

/// Stand-in for the membership CA. Signatures are HMAC-SHA256 under a key
/// derived from (key_seed, identity), so the registry can both issue and
/// check them. Identities are fixed once the genesis block is written.
class IdentityRegistry {
 public:
  explicit IdentityRegistry(uint64_t key_seed = 0) : key_seed_(key_seed) {}

  absl::Status Register(const IdentityId& id, IdentityRole role);

  bool Contains(const IdentityId& id) const { return ids_.contains(id); }
  absl::StatusOr<IdentityRole> RoleOf(const IdentityId& id) const;
  const std::map<IdentityId, IdentityRole>& identities() const { return ids_; }
  uint64_t key_seed() const { return key_seed_; }

  /// Fails with "UnknownIdentity" for unregistered signers.
  absl::StatusOr<Digest> Sign(const IdentityId& id,
                              std::string_view message) const;
  /// False for unknown identities as well as bad signatures.
  bool Verify(const IdentityId& id, std::string_view message,
              const Digest& signature) const;

 private:
  Digest KeyFor(const IdentityId& id) const;

  uint64_t key_seed_;
  std::map<IdentityId, IdentityRole> ids_;
};

/// `threshold` distinct signatures from the listed endorsers.
struct EndorsementPolicy {
  std::vector<IdentityId> endorsers;
  uint32_t threshold = 2;
};

/// True when the transaction carries enough valid endorsements.
bool SatisfiesPolicy(const Transaction& tx, const EndorsementPolicy& policy,
                     const IdentityRegistry& registry);

/// Contents of the genesis configuration transaction.
struct GenesisConfig {
  uint64_t key_seed = 0;
  std::map<IdentityId, IdentityRole> identities;
  EndorsementPolicy policy;
};

std::string EncodeGenesisConfig(const GenesisConfig& cfg);
absl::StatusOr<GenesisConfig> DecodeGenesisConfig(std::string_view json);

absl::StatusOr<IdentityRegistry> RegistryFromConfig(const GenesisConfig& cfg);

/// Block 0: a single config transaction, already flagged Valid.
absl::StatusOr<Block> MakeGenesisBlock(const GenesisConfig& cfg);

}  // namespace iod::ledger

#endif  // IOD_LEDGER_IDENTITY_H_
