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

#include "iod/ordering/raft.h"

#include <algorithm>
#include <utility>

#include "absl/status/status.h"

namespace iod::ordering {

std::string_view RaftRoleName(RaftRole r) {
  switch (r) {
    case RaftRole::kFollower:
      return "follower";
    case RaftRole::kCandidate:
      return "candidate";
    case RaftRole::kLeader:
      return "leader";
  }
  return "?";
}

RaftNode::RaftNode(RaftIndex id, uint32_t cluster_size)
    : id_(id),
      cluster_size_(cluster_size),
      next_index_(cluster_size, 1),
      match_index_(cluster_size, 0) {}

uint64_t RaftNode::TermAt(uint64_t index) const {
  if (index == 0 || index > log_.size()) return 0;
  return log_[index - 1].term;
}

const ledger::Block* RaftNode::LastBlock() const {
  for (auto it = log_.rbegin(); it != log_.rend(); ++it) {
    if (it->block) return &*it->block;
  }
  return nullptr;
}

void RaftNode::SetRole(RaftRole r) {
  if (role_ == r) return;
  role_ = r;
  notices_.push_back({RaftNotice::kRole, term_, r, 0, 0});
}

void RaftNode::BecomeFollower(uint64_t term) {
  if (term > term_) {
    term_ = term;
    voted_for_.reset();
    leader_hint_.reset();
    notices_.push_back({RaftNotice::kTerm, term_, role_, 0, 0});
  }
  pre_candidate_ = false;
  SetRole(RaftRole::kFollower);
}

bool RaftNode::LogUpToDate(uint64_t index, uint64_t term) const {
  const uint64_t my_last_term = TermAt(last_index());
  return term > my_last_term ||
         (term == my_last_term && index >= last_index());
}

std::vector<Outgoing> RaftNode::OnElectionTimeout() {
  if (role_ == RaftRole::kLeader) return {};
  leader_hint_.reset();
  if (Majority(1)) return Campaign();
  pre_candidate_ = true;
  votes_ = {id_};
  std::vector<Outgoing> out;
  for (RaftIndex p = 0; p < cluster_size_; ++p) {
    if (p == id_) continue;
    out.push_back({p, RequestVote{term_ + 1, id_, last_index(),
                                  TermAt(last_index()), true}});
  }
  return out;
}

std::vector<Outgoing> RaftNode::Campaign() {
  pre_candidate_ = false;
  ++term_;
  notices_.push_back({RaftNotice::kTerm, term_, role_, 0, 0});
  SetRole(RaftRole::kCandidate);
  voted_for_ = id_;
  leader_hint_.reset();
  notices_.push_back({RaftNotice::kVote, term_, role_, id_, 0});
  votes_ = {id_};
  if (Majority(votes_.size())) return BecomeLeader();
  std::vector<Outgoing> out;
  for (RaftIndex p = 0; p < cluster_size_; ++p) {
    if (p == id_) continue;
    out.push_back({p, RequestVote{term_, id_, last_index(),
                                  TermAt(last_index())}});
  }
  return out;
}

std::vector<Outgoing> RaftNode::BecomeLeader() {
  SetRole(RaftRole::kLeader);
  heard_from_.clear();
  leader_hint_ = id_;
  std::fill(next_index_.begin(), next_index_.end(), last_index() + 1);
  std::fill(match_index_.begin(), match_index_.end(), 0);
  log_.push_back({term_, std::nullopt});
  match_index_[id_] = last_index();
  AdvanceCommit();
  return OnHeartbeat();
}

Outgoing RaftNode::AppendFor(RaftIndex peer) const {
  AppendEntries m;
  m.term = term_;
  m.leader = id_;
  m.prev_log_index = next_index_[peer] - 1;
  m.prev_log_term = TermAt(m.prev_log_index);
  for (uint64_t i = next_index_[peer];
       i <= last_index() && m.entries.size() < kMaxEntriesPerAppend; ++i) {
    m.entries.push_back(log_[i - 1]);
  }
  m.leader_commit = commit_index_;
  return {peer, std::move(m)};
}

std::vector<Outgoing> RaftNode::OnHeartbeat() {
  std::vector<Outgoing> out;
  if (role_ != RaftRole::kLeader) return out;
  for (RaftIndex p = 0; p < cluster_size_; ++p) {
    if (p != id_) out.push_back(AppendFor(p));
  }
  return out;
}

absl::StatusOr<std::vector<Outgoing>> RaftNode::Propose(ledger::Block block) {
  if (role_ != RaftRole::kLeader) {
    return absl::FailedPreconditionError("not the raft leader");
  }
  log_.push_back({term_, std::move(block)});
  match_index_[id_] = last_index();
  AdvanceCommit();
  return OnHeartbeat();
}

void RaftNode::AdvanceCommit() {
  for (uint64_t n = last_index(); n > commit_index_; --n) {
    if (TermAt(n) != term_) break;
    size_t count = 0;
    for (RaftIndex p = 0; p < cluster_size_; ++p) {
      count += (p == id_ ? last_index() : match_index_[p]) >= n;
    }
    if (Majority(count)) {
      commit_index_ = n;
      notices_.push_back({RaftNotice::kCommit, term_, role_, 0, n});
      break;
    }
  }
}

std::vector<Outgoing> RaftNode::Step(const RaftMessage& msg) {
  return std::visit(
      [this](const auto& m) -> std::vector<Outgoing> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RequestVote>) {
          return HandleRequestVote(m);
        } else if constexpr (std::is_same_v<T, VoteReply>) {
          return HandleVoteReply(m);
        } else if constexpr (std::is_same_v<T, AppendEntries>) {
          return HandleAppendEntries(m);
        } else {
          return HandleAppendReply(m);
        }
      },
      msg);
}

std::vector<Outgoing> RaftNode::HandleRequestVote(const RequestVote& m) {
  if (m.pre_vote) {
    // Refuse while a leader is known: it is still heartbeating us.
    const bool grant = m.term > term_ && !leader_hint_ &&
                       LogUpToDate(m.last_log_index, m.last_log_term);
    return {{m.candidate,
             VoteReply{grant ? m.term : term_, id_, grant, true}}};
  }
  if (m.term > term_) BecomeFollower(m.term);
  const bool up_to_date = LogUpToDate(m.last_log_index, m.last_log_term);
  const bool grant = m.term == term_ &&
                     (!voted_for_ || *voted_for_ == m.candidate) && up_to_date;
  if (grant) {
    if (voted_for_ != m.candidate) {
      notices_.push_back({RaftNotice::kVote, term_, role_, m.candidate, 0});
    }
    voted_for_ = m.candidate;
    timer_reset_ = true;
  }
  return {{m.candidate, VoteReply{term_, id_, grant}}};
}

std::vector<Outgoing> RaftNode::HandleVoteReply(const VoteReply& m) {
  if (m.pre_vote) {
    if (!m.granted) {
      if (m.term > term_) BecomeFollower(m.term);
      return {};
    }
    if (!pre_candidate_ || m.term != term_ + 1) return {};
    votes_.insert(m.voter);
    if (Majority(votes_.size())) return Campaign();
    return {};
  }
  if (m.term > term_) {
    BecomeFollower(m.term);
    return {};
  }
  if (role_ != RaftRole::kCandidate || m.term != term_ || !m.granted) {
    return {};
  }
  votes_.insert(m.voter);
  if (Majority(votes_.size())) return BecomeLeader();
  return {};
}

std::vector<Outgoing> RaftNode::HandleAppendEntries(const AppendEntries& m) {
  if (m.term < term_) {
    return {{m.leader, AppendReply{term_, id_, false, last_index()}}};
  }
  BecomeFollower(m.term);
  leader_hint_ = m.leader;
  timer_reset_ = true;
  if (m.prev_log_index > last_index() ||
      TermAt(m.prev_log_index) != m.prev_log_term) {
    const uint64_t hint = std::min(last_index(), m.prev_log_index - 1);
    return {{m.leader, AppendReply{term_, id_, false, hint}}};
  }
  uint64_t index = m.prev_log_index;
  for (const LogEntry& e : m.entries) {
    ++index;
    if (index <= last_index()) {
      if (log_[index - 1].term == e.term) continue;
      // Conflicting suffix; never reaches below the commit point.
      log_.resize(index - 1);
    }
    log_.push_back(e);
  }
  const uint64_t new_commit = std::min(m.leader_commit, index);
  if (new_commit > commit_index_) {
    commit_index_ = new_commit;
    notices_.push_back({RaftNotice::kCommit, term_, role_, 0, commit_index_});
  }
  return {{m.leader, AppendReply{term_, id_, true, index}}};
}

std::vector<Outgoing> RaftNode::HandleAppendReply(const AppendReply& m) {
  if (m.term > term_) {
    BecomeFollower(m.term);
    return {};
  }
  if (role_ != RaftRole::kLeader || m.term != term_) return {};
  const RaftIndex f = m.follower;
  heard_from_.insert(f);
  if (m.success) {
    match_index_[f] = std::max(match_index_[f], m.match_index);
    next_index_[f] = std::max(next_index_[f], match_index_[f] + 1);
    AdvanceCommit();
    // Keep streaming while the follower is behind.
    if (next_index_[f] <= last_index()) return {AppendFor(f)};
    return {};
  }
  next_index_[f] =
      std::max<uint64_t>(1, std::min(next_index_[f] - 1, m.match_index + 1));
  return {AppendFor(f)};
}

void RaftNode::CheckQuorum() {
  if (role_ != RaftRole::kLeader) return;
  heard_from_.insert(id_);
  const bool ok = Majority(heard_from_.size());
  heard_from_.clear();
  if (ok) return;
  SetRole(RaftRole::kFollower);
  leader_hint_.reset();
}

std::vector<LogEntry> RaftNode::TakeCommitted() {
  std::vector<LogEntry> out;
  while (applied_ < commit_index_) {
    out.push_back(log_[applied_]);
    ++applied_;
  }
  return out;
}

std::vector<RaftNotice> RaftNode::TakeNotices() {
  return std::exchange(notices_, {});
}

bool RaftNode::TakeTimerReset() { return std::exchange(timer_reset_, false); }

void RaftNode::Restart() {
  SetRole(RaftRole::kFollower);
  pre_candidate_ = false;
  leader_hint_.reset();
  votes_.clear();
  std::fill(next_index_.begin(), next_index_.end(), last_index() + 1);
  std::fill(match_index_.begin(), match_index_.end(), 0);
  timer_reset_ = false;
}

}  // namespace iod::ordering
