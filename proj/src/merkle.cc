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

#include "iod/ledger/merkle.h"

#include "absl/status/status.h"

namespace iod::ledger {
namespace {

// Parent level of `level`. Odd levels pair the last node with itself.
std::vector<Digest> Parents(const std::vector<Digest>& level) {
  std::vector<Digest> up;
  up.reserve((level.size() + 1) / 2);
  for (size_t i = 0; i < level.size(); i += 2) {
    const Digest& right = i + 1 < level.size() ? level[i + 1] : level[i];
    up.push_back(Sha256Pair(level[i], right));
  }
  return up;
}

}  // namespace

absl::StatusOr<Digest> MerkleRoot(const std::vector<Digest>& leaves) {
  if (leaves.empty()) {
    return absl::InvalidArgumentError("EmptyList: merkle root of no leaves");
  }
  if (leaves.size() == 1) {
    return Sha256(std::string_view(
        reinterpret_cast<const char*>(leaves[0].data()), leaves[0].size()));
  }
  std::vector<Digest> level = leaves;
  while (level.size() > 1) level = Parents(level);
  return level[0];
}

absl::StatusOr<std::vector<ProofStep>> MerkleProof(
    const std::vector<Digest>& leaves, size_t index) {
  if (leaves.empty()) {
    return absl::InvalidArgumentError("EmptyList: merkle proof of no leaves");
  }
  if (index >= leaves.size()) {
    return absl::OutOfRangeError("leaf index out of range");
  }
  std::vector<ProofStep> proof;
  if (leaves.size() == 1) return proof;
  std::vector<Digest> level = leaves;
  while (level.size() > 1) {
    const size_t sibling = index ^ 1;
    if (index % 2 == 0) {
      proof.push_back(
          {sibling < level.size() ? level[sibling] : level[index], false});
    } else {
      proof.push_back({level[sibling], true});
    }
    level = Parents(level);
    index /= 2;
  }
  return proof;
}

bool VerifyMerkleProof(const Digest& leaf, const std::vector<ProofStep>& proof,
                       const Digest& root) {
  if (proof.empty()) {
    return Sha256(std::string_view(reinterpret_cast<const char*>(leaf.data()),
                                   leaf.size())) == root;
  }
  Digest acc = leaf;
  for (const ProofStep& step : proof) {
    acc = step.sibling_on_left ? Sha256Pair(step.sibling, acc)
                               : Sha256Pair(acc, step.sibling);
  }
  return acc == root;
}

}  // namespace iod::ledger
