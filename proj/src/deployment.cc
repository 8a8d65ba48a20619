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

#include "iod/txflow/deployment.h"

#include <string>

#include "absl/strings/str_cat.h"
#include "iod/ledger/identity.h"

namespace iod::txflow {

absl::StatusOr<std::unique_ptr<LedgerDeployment>> LedgerDeployment::Build(
    net::Network& net, const LedgerLayout& layout, ordering::RaftTrace* trace) {
  if (layout.orderers < 1 || layout.peers < 1) {
    return absl::InvalidArgumentError("need at least one orderer and one peer");
  }
  std::unique_ptr<LedgerDeployment> d(new LedgerDeployment());

  ledger::GenesisConfig cfg;
  cfg.key_seed = layout.key_seed;
  for (int i = 0; i < layout.orderers; ++i) {
    cfg.identities[absl::StrCat("orderer", i)] = ledger::IdentityRole::kOrderer;
  }
  for (int i = 0; i < layout.peers; ++i) {
    const std::string id = absl::StrCat("peer", i);
    cfg.identities[id] = ledger::IdentityRole::kPeer;
    cfg.policy.endorsers.push_back(id);
  }
  for (const auto& [node, id] : layout.clients) {
    cfg.identities[id] = ledger::IdentityRole::kClient;
  }
  cfg.policy.threshold = layout.threshold;
  auto genesis = ledger::MakeGenesisBlock(cfg);
  if (!genesis.ok()) return genesis.status();
  d->genesis_ = *std::move(genesis);

  auto attach = [&](uint32_t id, std::string name,
                    net::NodeRole role) -> absl::StatusOr<NodeId> {
    net::NodeInfo info;
    info.name = std::move(name);
    info.role = role;
    info.radio = net.lan_profile();
    if (absl::Status s = net.Attach(NodeId{id}, info, {0, 0}); !s.ok()) return s;
    return NodeId{id};
  };
  uint32_t next = layout.first_node_id;
  for (int i = 0; i < layout.orderers; ++i) {
    auto n = attach(next++, absl::StrCat("orderer", i), net::NodeRole::kOrderer);
    if (!n.ok()) return n.status();
    d->orderer_nodes_.push_back(*n);
  }
  for (int i = 0; i < layout.peers; ++i) {
    auto n = attach(next++, absl::StrCat("peer", i), net::NodeRole::kPeer);
    if (!n.ok()) return n.status();
    d->peer_nodes_.push_back(*n);
  }

  std::vector<NodeId> all = d->orderer_nodes_;
  all.insert(all.end(), d->peer_nodes_.begin(), d->peer_nodes_.end());
  for (const auto& [node, id] : layout.clients) all.push_back(node);
  // Full mesh among ledger nodes; clients reach all of them but not each
  // other.
  const size_t ledger_nodes = d->orderer_nodes_.size() + d->peer_nodes_.size();
  for (size_t a = 0; a < ledger_nodes; ++a) {
    for (size_t b = a + 1; b < all.size(); ++b) {
      absl::Status s = net.AddLink(all[a], all[b], net::LinkKind::kEdgeToEdge);
      if (!s.ok()) return s;
    }
  }

  for (int i = 0; i < layout.orderers; ++i) {
    d->orderers_.push_back(std::make_unique<ordering::Orderer>(
        net, d->orderer_nodes_[i], absl::StrCat("orderer", i),
        static_cast<ordering::RaftIndex>(i), d->orderer_nodes_, d->peer_nodes_,
        d->genesis_, layout.orderer, trace));
  }
  for (int i = 0; i < layout.peers; ++i) {
    auto p = Peer::Create(net, d->peer_nodes_[i], absl::StrCat("peer", i),
                          d->genesis_, d->orderer_nodes_, layout.peer);
    if (!p.ok()) return p.status();
    for (const auto& [node, id] : layout.clients) (*p)->Subscribe(node);
    d->peers_.push_back(*std::move(p));
  }
  GatewayConfig gw = layout.gateway;
  gw.threshold = layout.threshold;
  for (const auto& [node, id] : layout.clients) {
    d->gateways_.push_back(std::make_unique<Gateway>(
        net, node, id, d->peer_nodes_, d->orderer_nodes_, gw));
  }
  return d;
}

void LedgerDeployment::Start() {
  for (auto& o : orderers_) o->Start();
  for (auto& p : peers_) p->Start();
}

}  // namespace iod::txflow
