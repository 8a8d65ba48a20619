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

#ifndef IOD_ORDERING_RAFT_H_
#define IOD_ORDERING_RAFT_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "iod/ledger/block.h"

namespace iod::ordering {

/// Index of a node within its Raft cluster.
using RaftIndex = uint32_t;

enum class RaftRole { kFollower, kCandidate, kLeader };
std::string_view RaftRoleName(RaftRole r);

/// A log slot: a sealed block, or the no-op a new leader appends so it can
/// commit entries from earlier terms.
struct LogEntry {
  uint64_t term = 0;
  std::optional<ledger::Block> block;

  bool operator==(const LogEntry&) const = default;
};

// With pre_vote set, `term` is the term the sender would campaign in; the
// receiver answers without changing any state.
struct RequestVote {
  uint64_t term = 0;
  RaftIndex candidate = 0;
  uint64_t last_log_index = 0;
  uint64_t last_log_term = 0;
  bool pre_vote = false;
};

struct VoteReply {
  uint64_t term = 0;
  RaftIndex voter = 0;
  bool granted = false;
  bool pre_vote = false;
};

struct AppendEntries {
  uint64_t term = 0;
  RaftIndex leader = 0;
  uint64_t prev_log_index = 0;
  uint64_t prev_log_term = 0;
  std::vector<LogEntry> entries;
  uint64_t leader_commit = 0;
};

struct AppendReply {
  uint64_t term = 0;
  RaftIndex follower = 0;
  bool success = false;
  // On success the highest replicated index; on failure the follower's last
  // index, used as a hint for backing off.
  uint64_t match_index = 0;
};

using RaftMessage =
    std::variant<RequestVote, VoteReply, AppendEntries, AppendReply>;

struct Outgoing {
  RaftIndex to = 0;
  RaftMessage msg;
};

/// Things the embedding orderer reports to the trace.
struct RaftNotice {
  enum Kind { kTerm, kRole, kVote, kCommit };
  Kind kind = kTerm;
  uint64_t term = 0;
  RaftRole role = RaftRole::kFollower;
  RaftIndex peer = 0;    // vote target
  uint64_t index = 0;    // commit index
};

/// Raft state machine without clocks or I/O. Timers and transport belong to
/// the caller: it feeds timeouts and messages in, sends what comes out, and
/// re-arms the election timer whenever TakeTimerReset() says so.
class RaftNode {
 public:
  RaftNode(RaftIndex id, uint32_t cluster_size);

  /// Starts a pre-vote round; the real election (term bump) only follows once
  /// a majority agrees it has lost contact with the leader. A node cut off
  /// from the cluster therefore never inflates its term and cannot depose a
  /// healthy leader when it rejoins.
  std::vector<Outgoing> OnElectionTimeout();
  /// Leader only; replicates to every follower (empty entries = heartbeat).
  std::vector<Outgoing> OnHeartbeat();
  std::vector<Outgoing> Step(const RaftMessage& msg);

  /// Leader only: steps down unless a majority (self included) has answered
  /// since the previous check. Keeps a cut-off leader from accepting work it
  /// can never commit.
  void CheckQuorum();

  /// Appends a block to the leader's log and starts replicating it.
  /// FailedPrecondition when not leader.
  absl::StatusOr<std::vector<Outgoing>> Propose(ledger::Block block);

  /// Entries committed since the last call, in log order.
  std::vector<LogEntry> TakeCommitted();
  std::vector<RaftNotice> TakeNotices();
  /// True when a message since the last call should restart the election
  /// timer (valid leader contact or a granted vote).
  bool TakeTimerReset();

  /// Crash-recovery: persistent state (term, vote, log) and the applied
  /// position survive; leadership and replication progress do not.
  void Restart();

  RaftIndex id() const { return id_; }
  RaftRole role() const { return role_; }
  uint64_t term() const { return term_; }
  std::optional<RaftIndex> voted_for() const { return voted_for_; }
  std::optional<RaftIndex> leader_hint() const { return leader_hint_; }
  const std::vector<LogEntry>& log() const { return log_; }
  uint64_t commit_index() const { return commit_index_; }
  uint64_t last_index() const { return log_.size(); }
  uint64_t TermAt(uint64_t index) const;

  /// The last block in the log (committed or not), if any.
  const ledger::Block* LastBlock() const;

 private:
  void BecomeFollower(uint64_t term);
  std::vector<Outgoing> Campaign();
  bool LogUpToDate(uint64_t last_index, uint64_t last_term) const;
  std::vector<Outgoing> BecomeLeader();
  void SetRole(RaftRole r);
  Outgoing AppendFor(RaftIndex peer) const;
  void AdvanceCommit();
  bool Majority(size_t n) const { return n * 2 > cluster_size_; }

  std::vector<Outgoing> HandleRequestVote(const RequestVote& m);
  std::vector<Outgoing> HandleVoteReply(const VoteReply& m);
  std::vector<Outgoing> HandleAppendEntries(const AppendEntries& m);
  std::vector<Outgoing> HandleAppendReply(const AppendReply& m);

  RaftIndex id_;
  uint32_t cluster_size_;
  RaftRole role_ = RaftRole::kFollower;
  uint64_t term_ = 0;
  std::optional<RaftIndex> voted_for_;
  std::optional<RaftIndex> leader_hint_;
  std::vector<LogEntry> log_;  // index i lives at log_[i - 1]
  uint64_t commit_index_ = 0;
  uint64_t applied_ = 0;
  std::set<RaftIndex> votes_;
  bool pre_candidate_ = false;
  std::set<RaftIndex> heard_from_;
  std::vector<uint64_t> next_index_;
  std::vector<uint64_t> match_index_;
  std::vector<RaftNotice> notices_;
  bool timer_reset_ = false;
};

/// Entries per AppendEntries message; bounds the size of catch-up traffic.
inline constexpr size_t kMaxEntriesPerAppend = 8;

}  // namespace iod::ordering

#endif  // IOD_ORDERING_RAFT_H_
