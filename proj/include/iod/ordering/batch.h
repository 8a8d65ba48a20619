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

#ifndef IOD_ORDERING_BATCH_H_
#define IOD_ORDERING_BATCH_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "absl/status/status.h"
#include "iod/ledger/block.h"
#include "iod/sim/time.h"

namespace iod::ordering {

struct BatchConfig {
  SimTime timeout = SimTime::FromSeconds(2);
  uint32_t max_messages = 10;
  uint64_t max_bytes = 99ull * 1024 * 1024;

  absl::Status Validate() const;
};

/// Leader-local block cutting. A batch is cut when it reaches max_messages,
/// when the next transaction would push it past max_bytes, or when its
/// oldest transaction has waited `timeout`. A transaction larger than
/// max_bytes on its own gets a block to itself.
class BlockCutter {
 public:
  explicit BlockCutter(BatchConfig cfg) : cfg_(cfg) {}

  /// Adds `tx` and returns the batches that are ready, in order.
  std::vector<std::vector<ledger::Transaction>> Add(ledger::Transaction tx,
                                                    SimTime now);
  /// Cuts whatever is pending (the timeout path). Empty when nothing is.
  std::vector<ledger::Transaction> Cut();
  /// Drops the pending batch, e.g. on losing leadership.
  void Clear();

  /// When the pending batch times out, if any.
  std::optional<SimTime> deadline() const;
  size_t pending_count() const { return pending_.size(); }
  uint64_t pending_bytes() const { return pending_bytes_; }
  const BatchConfig& config() const { return cfg_; }

 private:
  BatchConfig cfg_;
  std::vector<ledger::Transaction> pending_;
  uint64_t pending_bytes_ = 0;
  SimTime first_arrival_;
};

}  // namespace iod::ordering

#endif  // IOD_ORDERING_BATCH_H_
