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

#ifndef IOD_LEDGER_MERKLE_H_
#define IOD_LEDGER_MERKLE_H_

#include <cstddef>
#include <vector>

#include "absl/status/statusor.h"
#include "iod/ledger/digest.h"

namespace iod::ledger {

/// Root of a binary hash tree over `leaves`. A lone node is hashed once more
/// on its way up, so a one-leaf tree has root H(leaf); odd levels duplicate
/// their last node. Fails with "EmptyList" on no leaves.
absl::StatusOr<Digest> MerkleRoot(const std::vector<Digest>& leaves);

struct ProofStep {
  Digest sibling;
  bool sibling_on_left = false;
};

/// Inclusion path for `leaves[index]`, bottom up.
absl::StatusOr<std::vector<ProofStep>> MerkleProof(
    const std::vector<Digest>& leaves, size_t index);

bool VerifyMerkleProof(const Digest& leaf, const std::vector<ProofStep>& proof,
                       const Digest& root);

}  // namespace iod::ledger

#endif  // IOD_LEDGER_MERKLE_H_
