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

#include "iod/ordering/batch.h"

#include <utility>

namespace iod::ordering {

absl::Status BatchConfig::Validate() const {
  if (timeout <= SimTime::Zero() || max_messages == 0 || max_bytes == 0) {
    return absl::InvalidArgumentError("batch limits must be positive");
  }
  return absl::OkStatus();
}

std::vector<std::vector<ledger::Transaction>> BlockCutter::Add(
    ledger::Transaction tx, SimTime now) {
  std::vector<std::vector<ledger::Transaction>> ready;
  const uint64_t size = ledger::WireSize(tx);
  if (size > cfg_.max_bytes) {
    if (!pending_.empty()) ready.push_back(Cut());
    ready.push_back({std::move(tx)});
    return ready;
  }
  if (!pending_.empty() && pending_bytes_ + size > cfg_.max_bytes) {
    ready.push_back(Cut());
  }
  if (pending_.empty()) first_arrival_ = now;
  pending_.push_back(std::move(tx));
  pending_bytes_ += size;
  if (pending_.size() >= cfg_.max_messages) ready.push_back(Cut());
  return ready;
}

std::vector<ledger::Transaction> BlockCutter::Cut() {
  pending_bytes_ = 0;
  return std::exchange(pending_, {});
}

void BlockCutter::Clear() { Cut(); }

std::optional<SimTime> BlockCutter::deadline() const {
  if (pending_.empty()) return std::nullopt;
  return first_arrival_ + cfg_.timeout;
}

}  // namespace iod::ordering
