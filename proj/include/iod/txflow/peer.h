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

#ifndef IOD_TXFLOW_PEER_H_
#define IOD_TXFLOW_PEER_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "iod/ledger/block.h"
#include "iod/ledger/chain.h"
#include "iod/net/network.h"
#include "iod/sim/kernel.h"

namespace iod::txflow {

// Wire messages between clients and peers.

struct ProposalRequest {
  uint64_t request_id = 0;
  ledger::Transaction tx;  // request fields only
};

struct ProposalResponse {
  uint64_t request_id = 0;
  ledger::Digest tx_id{};
  bool ok = false;
  std::string error;
  std::vector<ledger::ReadEntry> read_set;
  std::vector<ledger::WriteEntry> write_set;
  std::string response;
  ledger::Endorsement endorsement;
};

struct QueryRequest {
  uint64_t request_id = 0;
  ledger::IdentityId creator;
  std::string contract;
  std::string function;
  std::string args;
};

struct QueryResponse {
  uint64_t request_id = 0;
  bool ok = false;
  std::string error;
  std::string value;
};

/// Per-block commit notice for subscribed clients.
struct CommitEvent {
  uint64_t block = 0;
  std::vector<std::pair<ledger::Digest, ledger::ValidityFlag>> results;
};

inline constexpr char kTagPropose[] = "peer.propose";
inline constexpr char kTagEndorsement[] = "peer.endorsement";
inline constexpr char kTagQuery[] = "peer.query";
inline constexpr char kTagQueryReply[] = "peer.query_reply";
inline constexpr char kTagCommit[] = "peer.commit";

struct PeerConfig {
  // How long a gap in delivered blocks may persist before asking again.
  SimTime fetch_retry = SimTime::FromMillis(500);
};

/// Endorsing and committing peer. Endorses by executing contracts against
/// its committed state, answers queries locally, and validates and commits
/// delivered blocks strictly in order.
class Peer {
 public:
  static absl::StatusOr<std::unique_ptr<Peer>> Create(
      net::Network& net, NodeId self, ledger::IdentityId identity,
      const ledger::Block& genesis, std::vector<NodeId> orderers,
      PeerConfig cfg = {});

  Peer(const Peer&) = delete;
  Peer& operator=(const Peer&) = delete;

  /// Installs the network receiver.
  void Start();
  void OnDatagram(const net::Datagram& d);
  /// `client` receives a CommitEvent for every block this peer commits.
  void Subscribe(NodeId client) { subscribers_.push_back(client); }

  NodeId node() const { return self_; }
  const ledger::IdentityId& identity() const { return identity_; }
  const ledger::Ledger& ledger() const { return ledger_; }
  uint64_t endorsements() const { return endorsements_; }
  uint64_t queries() const { return queries_; }
  uint64_t fetches() const { return fetches_; }
  uint64_t append_errors() const { return append_errors_; }

 private:
  Peer(net::Network& net, NodeId self, ledger::IdentityId identity,
       ledger::Ledger ledger, std::vector<NodeId> orderers, PeerConfig cfg);

  void Send(NodeId dst, const char* tag, size_t bytes, std::any payload);
  void HandlePropose(const net::Datagram& d, const ProposalRequest& req);
  void HandleQuery(const net::Datagram& d, const QueryRequest& req);
  void HandleDeliver(const ledger::Block& block);
  void RequestMissing();

  net::Network& net_;
  Kernel& kernel_;
  NodeId self_;
  ledger::IdentityId identity_;
  ledger::Ledger ledger_;
  std::vector<NodeId> orderers_;
  PeerConfig cfg_;
  std::vector<NodeId> subscribers_;
  std::map<uint64_t, ledger::Block> pending_;  // delivered ahead of the tip
  std::optional<EventId> fetch_timer_;
  size_t next_orderer_ = 0;
  uint64_t next_msg_id_ = 1;
  uint64_t endorsements_ = 0;
  uint64_t queries_ = 0;
  uint64_t fetches_ = 0;
  uint64_t append_errors_ = 0;
};

/// Bytes of an endorsement reply on the wire.
size_t ProposalResponseBytes(const ProposalResponse& r);

}  // namespace iod::txflow

#endif  // IOD_TXFLOW_PEER_H_
