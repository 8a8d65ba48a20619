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

#include "iod/ordering/orderer.h"

#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"

namespace iod::ordering {

const char* SubmitStatusName(SubmitStatus s) {
  switch (s) {
    case SubmitStatus::kAccepted:
      return "Accepted";
    case SubmitStatus::kRedirect:
      return "RedirectToLeader";
    case SubmitStatus::kNoLeader:
      return "NoLeader";
    case SubmitStatus::kRejected:
      return "Rejected";
  }
  return "?";
}

uint64_t BlockWireSize(const ledger::Block& b) {
  uint64_t bytes = kControlBytes + 160;
  for (const ledger::Transaction& tx : b.txs) bytes += ledger::WireSize(tx);
  return bytes + b.flags.size();
}

namespace {

size_t MessageBytes(const RaftMessage& m) {
  size_t bytes = kControlBytes;
  if (const auto* ae = std::get_if<AppendEntries>(&m)) {
    for (const LogEntry& e : ae->entries) {
      bytes += 16 + (e.block ? BlockWireSize(*e.block) : 0);
    }
  }
  return bytes;
}

}  // namespace

Orderer::Orderer(net::Network& net, NodeId self, ledger::IdentityId identity,
                 RaftIndex index, std::vector<NodeId> cluster,
                 std::vector<NodeId> peers, const ledger::Block& genesis,
                 OrdererConfig cfg, RaftTrace* trace)
    : net_(net),
      kernel_(net.kernel()),
      self_(self),
      identity_(std::move(identity)),
      cluster_(std::move(cluster)),
      peers_(std::move(peers)),
      genesis_hash_(genesis.header_hash),
      cfg_(cfg),
      trace_(trace),
      raft_(index, static_cast<uint32_t>(cluster_.size())),
      cutter_(cfg.batch),
      election_rng_(
          kernel_.streams().Register(absl::StrCat("raft-election/", identity_))) {}

void Orderer::Start() {
  net_.SetReceiver(self_, [this](const net::Datagram& d) { OnDatagram(d); });
  if (cluster_.size() == 1) {
    // A majority of one: no need to wait out a timeout.
    Pump(raft_.OnElectionTimeout());
    return;
  }
  ArmElection();
}

void Orderer::Trace(RaftTraceRecord r) {
  if (trace_ == nullptr) return;
  r.at = kernel_.now();
  r.node = identity_;
  trace_->Add(std::move(r));
}

void Orderer::Crash() {
  if (crashed_) return;
  crashed_ = true;
  for (auto* t : {&election_timer_, &heartbeat_timer_, &batch_timer_,
                  &quorum_timer_}) {
    if (*t) kernel_.Cancel(**t);
    t->reset();
  }
  cutter_.Clear();
  RaftTraceRecord r;
  r.kind = RaftTraceRecord::kCrash;
  r.term = raft_.term();
  Trace(r);
}

void Orderer::Recover() {
  if (!crashed_) return;
  crashed_ = false;
  RaftTraceRecord r;
  r.kind = RaftTraceRecord::kRecover;
  r.term = raft_.term();
  Trace(r);
  raft_.Restart();
  Pump({});
  ArmElection();
}

void Orderer::ArmElection() {
  if (election_timer_) kernel_.Cancel(*election_timer_);
  const double lo = static_cast<double>(cfg_.election_min.micros());
  const double hi = static_cast<double>(cfg_.election_max.micros());
  const SimTime delay =
      SimTime::FromMicros(std::llround(election_rng_.NextUniformIn(lo, hi)));
  election_timer_ =
      kernel_.ScheduleAfter(delay, self_, "raft.election", [this] {
        election_timer_.reset();
        Pump(raft_.OnElectionTimeout());
        if (raft_.role() != RaftRole::kLeader) ArmElection();
      });
}

void Orderer::ArmHeartbeat() {
  heartbeat_timer_ =
      kernel_.ScheduleAfter(cfg_.heartbeat, self_, "raft.heartbeat", [this] {
        heartbeat_timer_.reset();
        if (raft_.role() != RaftRole::kLeader) return;
        Pump(raft_.OnHeartbeat());
        if (raft_.role() == RaftRole::kLeader && !heartbeat_timer_) {
          ArmHeartbeat();
        }
      });
}

void Orderer::ArmQuorumCheck() {
  quorum_timer_ =
      kernel_.ScheduleAfter(cfg_.election_max, self_, "raft.check_quorum", [this] {
        quorum_timer_.reset();
        if (raft_.role() != RaftRole::kLeader) return;
        raft_.CheckQuorum();
        Pump({});
        if (raft_.role() == RaftRole::kLeader) ArmQuorumCheck();
      });
}

void Orderer::ArmBatchTimer() {
  if (batch_timer_) {
    kernel_.Cancel(*batch_timer_);
    batch_timer_.reset();
  }
  const std::optional<SimTime> deadline = cutter_.deadline();
  if (!deadline) return;
  batch_timer_ = *kernel_.Schedule(
      std::max(*deadline, kernel_.now()), self_, "order.batch_timeout",
      [this] {
        batch_timer_.reset();
        if (raft_.role() != RaftRole::kLeader) return;
        std::vector<ledger::Transaction> txs = cutter_.Cut();
        if (!txs.empty()) SealAndPropose(std::move(txs));
      });
}

void Orderer::Send(NodeId dst, const char* tag, size_t bytes,
                   std::any payload) {
  net::Datagram d;
  d.src = self_;
  d.dst = dst;
  d.size_bytes = bytes;
  d.tag = tag;
  d.msg_id = next_msg_id_++;
  d.payload = std::move(payload);
  (void)net_.SendBulk(std::move(d));
}

void Orderer::Pump(std::vector<Outgoing> out) {
  for (Outgoing& o : out) {
    const size_t bytes = MessageBytes(o.msg);
    Send(cluster_[o.to], kTagRaft, bytes,
         RaftEnvelope{raft_.id(), std::move(o.msg)});
  }
  for (const RaftNotice& n : raft_.TakeNotices()) {
    RaftTraceRecord r;
    r.term = n.term;
    switch (n.kind) {
      case RaftNotice::kTerm:
        r.kind = RaftTraceRecord::kTerm;
        break;
      case RaftNotice::kRole:
        r.kind = RaftTraceRecord::kRole;
        r.role = n.role;
        break;
      case RaftNotice::kVote:
        r.kind = RaftTraceRecord::kVote;
        r.vote_for = net_.info(cluster_[n.peer]).name;
        break;
      case RaftNotice::kCommit:
        r.kind = RaftTraceRecord::kCommit;
        r.index = n.index;
        break;
    }
    Trace(r);
  }
  if (raft_.TakeTimerReset() && raft_.role() != RaftRole::kLeader) {
    ArmElection();
  }
  if (raft_.role() != last_role_) {
    const RaftRole was = last_role_;
    last_role_ = raft_.role();
    if (last_role_ == RaftRole::kLeader) {
      if (election_timer_) {
        kernel_.Cancel(*election_timer_);
        election_timer_.reset();
      }
      if (!heartbeat_timer_) ArmHeartbeat();
      if (!quorum_timer_ && cluster_.size() > 1) ArmQuorumCheck();
    } else if (was == RaftRole::kLeader) {
      // Pending transactions are lost with leadership; clients resubmit.
      cutter_.Clear();
      if (batch_timer_) kernel_.Cancel(*batch_timer_);
      batch_timer_.reset();
      for (auto* t : {&heartbeat_timer_, &quorum_timer_}) {
        if (*t) kernel_.Cancel(**t);
        t->reset();
      }
      if (!election_timer_) ArmElection();
    }
  }
  for (LogEntry& e : raft_.TakeCommitted()) {
    RaftTraceRecord r;
    r.kind = RaftTraceRecord::kApply;
    r.term = e.term;
    r.index = ++applied_index_;
    if (e.block) {
      r.block_number = e.block->header.number;
      r.entry = ledger::ToHex(e.block->header_hash);
    } else {
      r.entry = absl::StrCat("noop@", e.term);
    }
    Trace(r);
    if (!e.block) continue;
    committed_.push_back(*e.block);
    const uint64_t bytes = BlockWireSize(*e.block);
    for (NodeId p : peers_) {
      Send(p, kTagDeliver, bytes, DeliverBlock{*e.block});
    }
  }
}

void Orderer::OnDatagram(const net::Datagram& d) {
  if (crashed_) return;
  if (d.tag == kTagRaft) {
    const auto& env = std::any_cast<const RaftEnvelope&>(d.payload);
    Pump(raft_.Step(env.msg));
  } else if (d.tag == kTagSubmit) {
    HandleSubmit(d, std::any_cast<const SubmitTx&>(d.payload));
  } else if (d.tag == kTagFetch) {
    const uint64_t from = std::any_cast<const FetchBlocks&>(d.payload).from;
    for (uint64_t n = from; n >= 1 && n <= committed_.size() &&
                            n < from + kMaxBlocksPerFetch;
         ++n) {
      const ledger::Block& b = committed_[n - 1];
      Send(d.src, kTagDeliver, BlockWireSize(b), DeliverBlock{b});
    }
  }
}

void Orderer::HandleSubmit(const net::Datagram& d, const SubmitTx& s) {
  SubmitReply reply;
  reply.tx_id = s.tx.tx_id;
  if (s.tx.kind != ledger::TxKind::kInvoke) {
    reply.status = SubmitStatus::kRejected;
  } else if (raft_.role() == RaftRole::kLeader) {
    reply.status = SubmitStatus::kAccepted;
  } else if (raft_.leader_hint()) {
    reply.status = SubmitStatus::kRedirect;
    reply.leader = cluster_[*raft_.leader_hint()];
  } else {
    reply.status = SubmitStatus::kNoLeader;
  }
  Send(d.src, kTagSubmitReply, kControlBytes, reply);
  if (reply.status != SubmitStatus::kAccepted) return;
  for (auto& batch : cutter_.Add(s.tx, kernel_.now())) {
    SealAndPropose(std::move(batch));
  }
  ArmBatchTimer();
}

void Orderer::SealAndPropose(std::vector<ledger::Transaction> txs) {
  const ledger::Block* last = raft_.LastBlock();
  const uint64_t number = last ? last->header.number + 1 : 1;
  const ledger::Digest prev = last ? last->header_hash : genesis_hash_;
  absl::StatusOr<ledger::Block> block =
      ledger::SealBlock(number, prev, identity_, kernel_.now(), std::move(txs));
  if (!block.ok()) return;
  RaftTraceRecord r;
  r.kind = RaftTraceRecord::kCut;
  r.term = raft_.term();
  r.block_number = number;
  r.entry = ledger::ToHex(block->header_hash);
  r.tx_count = block->txs.size();
  Trace(r);
  absl::StatusOr<std::vector<Outgoing>> out = raft_.Propose(*std::move(block));
  if (out.ok()) Pump(*std::move(out));
}

}  // namespace iod::ordering
