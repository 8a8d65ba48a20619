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

#ifndef IOD_ORDERING_TRACE_H_
#define IOD_ORDERING_TRACE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "iod/ordering/raft.h"
#include "iod/sim/time.h"

namespace iod::ordering {

struct RaftTraceRecord {
  enum Kind { kTerm, kRole, kVote, kCommit, kApply, kCut, kCrash, kRecover };

  SimTime at;
  std::string node;
  Kind kind = kTerm;
  uint64_t term = 0;
  RaftRole role = RaftRole::kFollower;
  std::string vote_for;
  uint64_t index = 0;
  // For kApply and kCut: block number and header hash (hex), or "noop".
  uint64_t block_number = 0;
  std::string entry;
  uint64_t tx_count = 0;
};

const char* RaftTraceKindName(RaftTraceRecord::Kind k);

/// Append-only record of Raft activity across all orderers of a run.
class RaftTrace {
 public:
  void Add(RaftTraceRecord r) { records_.push_back(std::move(r)); }
  const std::vector<RaftTraceRecord>& records() const { return records_; }

  /// One JSON object per line.
  std::string ToJsonl() const;

 private:
  std::vector<RaftTraceRecord> records_;
};

struct TraceCheck {
  bool ok = true;
  std::string violation;
};

/// At most one node becomes leader in any term.
TraceCheck CheckElectionSafety(const RaftTrace& trace);
/// Every node applies the same entry at the same log index.
TraceCheck CheckAppliedAgreement(const RaftTrace& trace);
/// Committed prefixes of every pair of logs are entry-for-entry equal.
TraceCheck CheckLogMatching(const std::vector<const RaftNode*>& nodes);

}  // namespace iod::ordering

#endif  // IOD_ORDERING_TRACE_H_
