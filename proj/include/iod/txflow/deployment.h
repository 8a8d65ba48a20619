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

#ifndef IOD_TXFLOW_DEPLOYMENT_H_
#define IOD_TXFLOW_DEPLOYMENT_H_

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "iod/ledger/block.h"
#include "iod/net/network.h"
#include "iod/ordering/orderer.h"
#include "iod/ordering/trace.h"
#include "iod/txflow/gateway.h"
#include "iod/txflow/peer.h"

namespace iod::txflow {

struct LedgerLayout {
  int orderers = 3;
  int peers = 3;
  ordering::OrdererConfig orderer;
  PeerConfig peer;
  GatewayConfig gateway;
  uint64_t key_seed = 1;
  uint32_t threshold = 2;
  // Orderers take ids first_node_id.., peers follow them.
  uint32_t first_node_id = 100;
  // Boat-side nodes, already attached, that get a client identity and a
  // gateway. They are linked to every orderer and peer.
  std::vector<std::pair<NodeId, ledger::IdentityId>> clients;
};

/// The ledger side of a scenario: orderers, peers and client gateways on
/// one LAN, sharing a genesis block.
class LedgerDeployment {
 public:
  static absl::StatusOr<std::unique_ptr<LedgerDeployment>> Build(
      net::Network& net, const LedgerLayout& layout,
      ordering::RaftTrace* trace);

  /// Starts orderers and peers. Gateways are wired by their owner, through
  /// Gateway::Install or by forwarding datagrams to Gateway::OnDatagram.
  void Start();

  const ledger::Block& genesis() const { return genesis_; }
  std::vector<std::unique_ptr<ordering::Orderer>>& orderers() { return orderers_; }
  std::vector<std::unique_ptr<Peer>>& peers() { return peers_; }
  std::vector<std::unique_ptr<Gateway>>& gateways() { return gateways_; }
  const std::vector<std::unique_ptr<ordering::Orderer>>& orderers() const {
    return orderers_;
  }
  const std::vector<std::unique_ptr<Peer>>& peers() const { return peers_; }
  const std::vector<std::unique_ptr<Gateway>>& gateways() const { return gateways_; }
  const std::vector<NodeId>& orderer_nodes() const { return orderer_nodes_; }
  const std::vector<NodeId>& peer_nodes() const { return peer_nodes_; }

 private:
  LedgerDeployment() = default;

  ledger::Block genesis_;
  std::vector<NodeId> orderer_nodes_;
  std::vector<NodeId> peer_nodes_;
  std::vector<std::unique_ptr<ordering::Orderer>> orderers_;
  std::vector<std::unique_ptr<Peer>> peers_;
  std::vector<std::unique_ptr<Gateway>> gateways_;
};

}  // namespace iod::txflow

#endif  // IOD_TXFLOW_DEPLOYMENT_H_
