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

#ifndef IOD_TXFLOW_GATEWAY_H_
#define IOD_TXFLOW_GATEWAY_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "iod/ledger/block.h"
#include "iod/net/network.h"
#include "iod/ordering/client.h"
#include "iod/sim/kernel.h"
#include "iod/txflow/peer.h"

namespace iod::txflow {

struct GatewayConfig {
  // Endorsers that have not answered by then are left out.
  SimTime endorse_timeout = SimTime::FromSeconds(1);
  // Per peer; the next peer is tried after this.
  SimTime query_timeout = SimTime::FromSeconds(1);
  // Matching endorsements required before submitting.
  uint32_t threshold = 2;
  // Re-proposals of an invoke that committed as InvalidVersionConflict.
  int conflict_retries = 0;
  ordering::SubmitterConfig submit;
};

/// Life of one invoke from proposal to commit.
struct TxReceipt {
  uint64_t seq = 0;
  ledger::Digest tx_id{};
  std::string contract;
  std::string function;
  std::string args;
  uint64_t attachment_bytes = 0;
  uint64_t wire_bytes = 0;
  SimTime proposed_at;
  std::optional<SimTime> endorsed_at;
  std::optional<SimTime> committed_at;
  int endorsements = 0;
  std::optional<ledger::ValidityFlag> flag;
  uint64_t block = 0;
  // EndorsementMismatch, PolicyUnsatisfied or the endorsers' contract error.
  std::string error;
  std::string response;
  int attempt = 0;
  // Receipt of the re-proposal this one was replaced by, if any.
  std::optional<uint64_t> retried_as;

  bool finished() const { return committed_at.has_value() || !error.empty(); }
};

struct QueryRecord {
  uint64_t seq = 0;
  std::string contract;
  std::string function;
  SimTime issued_at;
  std::optional<SimTime> answered_at;
  uint64_t reply_bytes = 0;
  std::string error;
};

/// Ledger client for one identity: runs proposals against the endorsers,
/// submits endorsed transactions for ordering, follows commit events, and
/// answers queries from a single peer without touching the orderers.
class Gateway {
 public:
  using TxCallback = std::function<void(const TxReceipt&)>;
  using QueryCallback = std::function<void(absl::StatusOr<std::string>)>;

  Gateway(net::Network& net, NodeId self, ledger::IdentityId identity,
          std::vector<NodeId> endorsers, std::vector<NodeId> orderers,
          GatewayConfig cfg = {});

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Makes the gateway the node's only receiver.
  void Install();
  /// Returns false for datagrams that are not ledger traffic.
  bool OnDatagram(const net::Datagram& d);

  /// Starts an invoke and returns its receipt number. `attachment_bytes`
  /// defaults to the function's size class. `done` runs once the receipt is
  /// final (committed with a flag, or failed before ordering).
  absl::StatusOr<uint64_t> Invoke(const std::string& contract,
                                  const std::string& function,
                                  const std::string& args,
                                  std::optional<uint64_t> attachment_bytes = {},
                                  TxCallback done = nullptr);

  absl::Status Query(const std::string& contract, const std::string& function,
                     const std::string& args, QueryCallback done);

  const std::vector<TxReceipt>& receipts() const { return receipts_; }
  const std::vector<QueryRecord>& queries() const { return query_log_; }
  const ordering::Submitter& submitter() const { return submitter_; }
  const ledger::IdentityId& identity() const { return identity_; }
  NodeId node() const { return self_; }

 private:
  struct Proposal {
    uint64_t seq = 0;
    ledger::Transaction tx;
    std::vector<ProposalResponse> responses;
    std::optional<EventId> timer;
    TxCallback done;
  };
  struct PendingQuery {
    uint64_t seq = 0;
    QueryRequest req;
    size_t next_peer = 0;
    std::optional<EventId> timer;
    QueryCallback done;
  };

  uint64_t StartInvoke(const std::string& contract, const std::string& function,
                       const std::string& args, uint64_t attachment_bytes,
                       int attempt, TxCallback done);
  void Send(NodeId dst, const char* tag, size_t bytes, std::any payload);
  void OnEndorsement(const ProposalResponse& r);
  void Decide(uint64_t request_id);
  void Fail(Proposal& p, std::string error);
  void OnCommit(const CommitEvent& ev);
  void SendQuery(uint64_t request_id);
  void OnQueryReply(const net::Datagram& d, const QueryResponse& r);

  net::Network& net_;
  Kernel& kernel_;
  NodeId self_;
  ledger::IdentityId identity_;
  std::vector<NodeId> endorsers_;
  GatewayConfig cfg_;
  ordering::Submitter submitter_;
  std::vector<TxReceipt> receipts_;
  std::vector<QueryRecord> query_log_;
  std::map<ledger::Digest, uint64_t> by_tx_id_;
  std::map<uint64_t, Proposal> proposals_;  // by request id
  std::map<ledger::Digest, TxCallback> awaiting_commit_;
  std::map<uint64_t, PendingQuery> pending_queries_;
  uint64_t next_request_id_ = 1;
  uint64_t next_nonce_ = 1;
  uint64_t next_msg_id_ = 1;
};

}  // namespace iod::txflow

#endif  // IOD_TXFLOW_GATEWAY_H_
