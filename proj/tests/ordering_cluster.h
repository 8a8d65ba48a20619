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

#ifndef IOD_TESTS_ORDERING_CLUSTER_H_
#define IOD_TESTS_ORDERING_CLUSTER_H_

#include <any>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "iod/ledger/block.h"
#include "iod/ledger/identity.h"
#include "iod/net/network.h"
#include "iod/ordering/client.h"
#include "iod/ordering/orderer.h"
#include "iod/ordering/raft.h"
#include "iod/ordering/trace.h"
#include "iod/sim/kernel.h"

namespace iod::ordering::harness {

inline ledger::Transaction Tx(uint64_t nonce, uint64_t attachment = 0) {
  ledger::Transaction tx;
  tx.creator = "edge";
  tx.contract = "drone";
  tx.function = "update_drone_info";
  tx.nonce = nonce;
  tx.attachment_bytes = attachment;
  tx.tx_id = ledger::ComputeTxId(tx);
  return tx;
}

// Orderers, three recording peers and a submitting client on one LAN.
class Cluster {
 public:
  Cluster(uint64_t seed, int orderers) : kernel_(seed), net_(kernel_) {
    ledger::GenesisConfig cfg;
    cfg.key_seed = seed;
    for (int i = 0; i < 3; ++i) {
      cfg.identities["peer" + std::to_string(i)] = ledger::IdentityRole::kPeer;
    }
    cfg.policy = {{"peer0", "peer1", "peer2"}, 2};
    genesis_ = *ledger::MakeGenesisBlock(cfg);

    std::vector<NodeId> all;
    for (int i = 0; i < orderers; ++i) {
      orderer_ids_.push_back(Attach(1 + i, "orderer" + std::to_string(i),
                                    net::NodeRole::kOrderer));
    }
    for (int i = 0; i < 3; ++i) {
      const NodeId p =
          Attach(11 + i, "peer" + std::to_string(i), net::NodeRole::kPeer);
      peer_ids_.push_back(p);
      net_.SetReceiver(p, [this, i](const net::Datagram& d) { OnPeer(i, d); });
    }
    client_id_ = Attach(20, "edge", net::NodeRole::kEdgeSink);
    auto nodes = net_.Nodes();
    for (size_t a = 0; a < nodes.size(); ++a) {
      for (size_t b = a + 1; b < nodes.size(); ++b) {
        Note(net_.AddLink(nodes[a], nodes[b], net::LinkKind::kEdgeToEdge));
      }
    }
    peer_blocks_.resize(3);
    for (int i = 0; i < orderers; ++i) {
      orderers_.push_back(std::make_unique<Orderer>(
          net_, orderer_ids_[i], "orderer" + std::to_string(i), i,
          orderer_ids_, peer_ids_, genesis_, OrdererConfig{}, &trace_));
    }
    for (auto& o : orderers_) o->Start();
    client_ = std::make_unique<Submitter>(net_, client_id_, orderer_ids_);
    net_.SetReceiver(client_id_, [this](const net::Datagram& d) {
      if (d.tag == kTagSubmitReply) client_->OnReply(d);
    });
  }

  NodeId Attach(uint32_t id, std::string name, net::NodeRole role) {
    net::NodeInfo info;
    info.name = std::move(name);
    info.role = role;
    info.radio = net::EdgeLanProfile();
    Note(net_.Attach(NodeId{id}, info, {0, 0}));
    return NodeId{id};
  }

  void OnPeer(int peer, const net::Datagram& d) {
    if (d.tag != kTagDeliver) return;
    const auto& blk = std::any_cast<const DeliverBlock&>(d.payload).block;
    auto& mine = peer_blocks_[peer];
    // Deliveries from several orderers: keep the first copy of each number.
    if (blk.header.number != mine.size() + 1) {
      if (blk.header.number > mine.size() + 1) ++gaps_;
      return;
    }
    mine.push_back(blk);
    for (const auto& tx : blk.txs) {
      commit_at_.emplace(tx.tx_id, kernel_.now());
      client_->MarkCommitted(tx.tx_id);
    }
  }

  void RunUntil(SimTime t) { (void)kernel_.RunUntil(t); }

  void Submit(const ledger::Transaction& tx) {
    submit_at_.emplace(tx.tx_id, kernel_.now());
    client_->Submit(tx);
  }

  // Partitions orderer `n` from the other orderers only.
  void Isolate(NodeId n, net::LinkState s) {
    for (NodeId other : orderer_ids_) {
      if (other != n) Note(net_.SetLinkState(n, other, s));
    }
  }

  int LeaderIndex() const {
    for (size_t i = 0; i < orderers_.size(); ++i) {
      if (!orderers_[i]->crashed() &&
          orderers_[i]->raft().role() == RaftRole::kLeader) {
        return static_cast<int>(i);
      }
    }
    return -1;
  }

  std::vector<const RaftNode*> Rafts() const {
    std::vector<const RaftNode*> out;
    for (auto& o : orderers_) out.push_back(&o->raft());
    return out;
  }

  // Election safety, applied agreement, log matching and in-order delivery.
  // Empty when all hold.
  std::vector<std::string> SafetyViolations() const {
    std::vector<std::string> out = setup_errors_;
    TraceCheck e = CheckElectionSafety(trace_);
    if (!e.ok) out.push_back("election safety: " + e.violation);
    TraceCheck a = CheckAppliedAgreement(trace_);
    if (!a.ok) out.push_back("applied agreement: " + a.violation);
    TraceCheck m = CheckLogMatching(Rafts());
    if (!m.ok) out.push_back("log matching: " + m.violation);
    if (gaps_ != 0) out.push_back("peer saw " + std::to_string(gaps_) + " block gaps");
    return out;
  }

  Kernel kernel_;
  net::Network net_;
  RaftTrace trace_;
  ledger::Block genesis_;
  std::vector<NodeId> orderer_ids_;
  std::vector<NodeId> peer_ids_;
  NodeId client_id_;
  std::vector<std::unique_ptr<Orderer>> orderers_;
  std::unique_ptr<Submitter> client_;
  std::vector<std::vector<ledger::Block>> peer_blocks_;
  std::map<ledger::Digest, SimTime> submit_at_;
  std::map<ledger::Digest, SimTime> commit_at_;
  uint64_t gaps_ = 0;
  std::vector<std::string> setup_errors_;

 private:
  void Note(const absl::Status& s) {
    if (!s.ok()) setup_errors_.push_back(std::string(s.message()));
  }
};

}  // namespace iod::ordering::harness

#endif  // IOD_TESTS_ORDERING_CLUSTER_H_
