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

#ifndef IOD_ORDERING_ORDERER_H_
#define IOD_ORDERING_ORDERER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iod/ledger/block.h"
#include "iod/net/network.h"
#include "iod/ordering/batch.h"
#include "iod/ordering/raft.h"
#include "iod/ordering/trace.h"
#include "iod/sim/kernel.h"

namespace iod::ordering {

// Wire messages between clients, orderers and peers.

struct RaftEnvelope {
  RaftIndex from = 0;
  RaftMessage msg;
};

struct SubmitTx {
  ledger::Transaction tx;
};

enum class SubmitStatus { kAccepted, kRedirect, kNoLeader, kRejected };
const char* SubmitStatusName(SubmitStatus s);

struct SubmitReply {
  ledger::Digest tx_id{};
  SubmitStatus status = SubmitStatus::kNoLeader;
  std::optional<NodeId> leader;
};

struct DeliverBlock {
  ledger::Block block;
};

/// A peer that missed deliveries asks for committed blocks from `from` on.
struct FetchBlocks {
  uint64_t from = 1;
};

inline constexpr char kTagRaft[] = "raft";
inline constexpr char kTagSubmit[] = "order.submit";
inline constexpr char kTagSubmitReply[] = "order.reply";
inline constexpr char kTagDeliver[] = "order.deliver";
inline constexpr char kTagFetch[] = "order.fetch";

/// Blocks returned per fetch request.
inline constexpr size_t kMaxBlocksPerFetch = 8;

/// Fixed per-message overhead for control traffic and envelopes.
inline constexpr size_t kControlBytes = 64;

/// Bytes a block takes on the wire, attachments included.
uint64_t BlockWireSize(const ledger::Block& b);

struct OrdererConfig {
  BatchConfig batch;
  SimTime election_min = SimTime::FromMillis(150);
  SimTime election_max = SimTime::FromMillis(300);
  SimTime heartbeat = SimTime::FromMillis(50);
};

/// One ordering node: a RaftNode driven by kernel timers and network
/// messages, with leader-local block cutting. Committed blocks are sent to
/// every peer in log order.
class Orderer {
 public:
  Orderer(net::Network& net, NodeId self, ledger::IdentityId identity,
          RaftIndex index, std::vector<NodeId> cluster,
          std::vector<NodeId> peers, const ledger::Block& genesis,
          OrdererConfig cfg, RaftTrace* trace);

  Orderer(const Orderer&) = delete;
  Orderer& operator=(const Orderer&) = delete;

  /// Installs the network receiver and arms the first election timer.
  void Start();
  /// Stops all activity; messages to a crashed node are ignored.
  void Crash();
  void Recover();

  void OnDatagram(const net::Datagram& d);

  NodeId node() const { return self_; }
  const ledger::IdentityId& identity() const { return identity_; }
  bool crashed() const { return crashed_; }
  const RaftNode& raft() const { return raft_; }
  const BlockCutter& cutter() const { return cutter_; }
  /// Blocks committed through this node's log, in order.
  const std::vector<ledger::Block>& committed() const { return committed_; }

 private:
  void Pump(std::vector<Outgoing> out);
  void ArmElection();
  void ArmHeartbeat();
  void ArmBatchTimer();
  void ArmQuorumCheck();
  void Send(NodeId dst, const char* tag, size_t bytes, std::any payload);
  void HandleSubmit(const net::Datagram& d, const SubmitTx& s);
  void SealAndPropose(std::vector<ledger::Transaction> txs);
  void Trace(RaftTraceRecord r);

  net::Network& net_;
  Kernel& kernel_;
  NodeId self_;
  ledger::IdentityId identity_;
  std::vector<NodeId> cluster_;
  std::vector<NodeId> peers_;
  ledger::Digest genesis_hash_;
  OrdererConfig cfg_;
  RaftTrace* trace_;
  RaftNode raft_;
  BlockCutter cutter_;
  RandomStream& election_rng_;
  std::vector<ledger::Block> committed_;
  bool crashed_ = false;
  RaftRole last_role_ = RaftRole::kFollower;
  std::optional<EventId> election_timer_;
  std::optional<EventId> heartbeat_timer_;
  std::optional<EventId> batch_timer_;
  std::optional<EventId> quorum_timer_;
  uint64_t applied_index_ = 0;
  uint64_t next_msg_id_ = 1;
};

}  // namespace iod::ordering

#endif  // IOD_ORDERING_ORDERER_H_
