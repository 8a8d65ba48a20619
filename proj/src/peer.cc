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

#include "iod/txflow/peer.h"

#include <utility>

#include "absl/strings/str_cat.h"
#include "iod/ordering/orderer.h"
#include "iod/txflow/contracts.h"

namespace iod::txflow {

size_t ProposalResponseBytes(const ProposalResponse& r) {
  size_t bytes = ordering::kControlBytes + r.response.size() + r.error.size();
  for (const auto& e : r.read_set) bytes += e.key.size() + 12;
  for (const auto& e : r.write_set) bytes += e.key.size() + e.value.size();
  return bytes;
}

absl::StatusOr<std::unique_ptr<Peer>> Peer::Create(
    net::Network& net, NodeId self, ledger::IdentityId identity,
    const ledger::Block& genesis, std::vector<NodeId> orderers,
    PeerConfig cfg) {
  auto ledger = ledger::Ledger::Create(genesis);
  if (!ledger.ok()) return ledger.status();
  auto role = ledger->registry().RoleOf(identity);
  if (!role.ok()) return role.status();
  if (*role != ledger::IdentityRole::kPeer) {
    return absl::InvalidArgumentError(
        absl::StrCat("UnknownIdentity: ", identity, " is not a peer"));
  }
  return std::unique_ptr<Peer>(new Peer(net, self, std::move(identity),
                                        *std::move(ledger),
                                        std::move(orderers), cfg));
}

Peer::Peer(net::Network& net, NodeId self, ledger::IdentityId identity,
           ledger::Ledger ledger, std::vector<NodeId> orderers, PeerConfig cfg)
    : net_(net),
      kernel_(net.kernel()),
      self_(self),
      identity_(std::move(identity)),
      ledger_(std::move(ledger)),
      orderers_(std::move(orderers)),
      cfg_(cfg) {}

void Peer::Start() {
  net_.SetReceiver(self_, [this](const net::Datagram& d) { OnDatagram(d); });
}

void Peer::Send(NodeId dst, const char* tag, size_t bytes, std::any payload) {
  net::Datagram d;
  d.src = self_;
  d.dst = dst;
  d.size_bytes = bytes;
  d.tag = tag;
  d.msg_id = next_msg_id_++;
  d.payload = std::move(payload);
  (void)net_.SendBulk(std::move(d));
}

void Peer::OnDatagram(const net::Datagram& d) {
  if (d.tag == kTagPropose) {
    HandlePropose(d, std::any_cast<const ProposalRequest&>(d.payload));
  } else if (d.tag == kTagQuery) {
    HandleQuery(d, std::any_cast<const QueryRequest&>(d.payload));
  } else if (d.tag == ordering::kTagDeliver) {
    HandleDeliver(std::any_cast<const ordering::DeliverBlock&>(d.payload).block);
  }
}

void Peer::HandlePropose(const net::Datagram& d, const ProposalRequest& req) {
  ProposalResponse resp;
  resp.request_id = req.request_id;
  resp.tx_id = req.tx.tx_id;
  const ledger::Transaction& tx = req.tx;
  auto fail = [&](std::string why) {
    resp.error = std::move(why);
    Send(d.src, kTagEndorsement, ProposalResponseBytes(resp), resp);
  };
  if (tx.kind != ledger::TxKind::kInvoke) return fail("NotAnInvoke");
  if (ledger::ComputeTxId(tx) != tx.tx_id) return fail("BadTxId");
  if (!ledger_.registry().Contains(tx.creator)) {
    return fail(absl::StrCat("UnknownIdentity: ", tx.creator));
  }
  auto spec = LookupFunction(tx.contract, tx.function);
  if (!spec.ok()) return fail(std::string(spec.status().message()));
  if ((*spec)->read_only) return fail("NotAnInvoke: read-only function");
  auto result = Execute(ledger_.state(), tx.contract, tx.function, tx.args);
  if (!result.ok()) return fail(std::string(result.status().message()));

  ledger::Transaction endorsed = tx;
  endorsed.read_set = result->read_set;
  endorsed.write_set = result->write_set;
  endorsed.response = result->response;
  auto sig = ledger_.registry().Sign(identity_,
                                     ledger::EndorsementPayload(endorsed));
  if (!sig.ok()) return fail(std::string(sig.status().message()));
  resp.ok = true;
  resp.read_set = std::move(endorsed.read_set);
  resp.write_set = std::move(endorsed.write_set);
  resp.response = std::move(endorsed.response);
  resp.endorsement = {identity_, *sig};
  ++endorsements_;
  Send(d.src, kTagEndorsement, ProposalResponseBytes(resp), std::move(resp));
}

void Peer::HandleQuery(const net::Datagram& d, const QueryRequest& req) {
  QueryResponse resp;
  resp.request_id = req.request_id;
  uint64_t payload = 0;
  auto spec = LookupFunction(req.contract, req.function);
  if (!spec.ok()) {
    resp.error = std::string(spec.status().message());
  } else if (!(*spec)->read_only) {
    resp.error = "NotAQuery";
  } else if (!ledger_.registry().Contains(req.creator)) {
    resp.error = absl::StrCat("UnknownIdentity: ", req.creator);
  } else {
    auto result = Execute(ledger_.state(), req.contract, req.function, req.args);
    if (result.ok()) {
      resp.ok = true;
      resp.value = std::move(result->response);
      payload = (*spec)->payload_bytes;
    } else {
      resp.error = std::string(result.status().message());
    }
  }
  ++queries_;
  const size_t bytes = ordering::kControlBytes + resp.value.size() +
                       resp.error.size() + payload;
  Send(d.src, kTagQueryReply, bytes, std::move(resp));
}

void Peer::HandleDeliver(const ledger::Block& block) {
  const uint64_t n = block.header.number;
  if (n < ledger_.height() || pending_.contains(n)) return;
  pending_.emplace(n, block);
  while (!pending_.empty() && pending_.begin()->first == ledger_.height()) {
    ledger::Block next = std::move(pending_.begin()->second);
    pending_.erase(pending_.begin());
    if (absl::Status s = ledger_.Append(std::move(next)); !s.ok()) {
      // A block that does not link is dropped; a correct copy will be
      // fetched again.
      ++append_errors_;
      continue;
    }
    const ledger::Block& tip = ledger_.tip();
    CommitEvent ev;
    ev.block = tip.header.number;
    for (size_t i = 0; i < tip.txs.size(); ++i) {
      ev.results.push_back({tip.txs[i].tx_id, tip.flags[i]});
    }
    const size_t bytes = ordering::kControlBytes + 33 * ev.results.size();
    for (NodeId c : subscribers_) Send(c, kTagCommit, bytes, ev);
  }
  if (!pending_.empty() && !fetch_timer_) RequestMissing();
}

void Peer::RequestMissing() {
  if (orderers_.empty()) return;
  const NodeId o = orderers_[next_orderer_++ % orderers_.size()];
  ++fetches_;
  Send(o, ordering::kTagFetch, ordering::kControlBytes,
       ordering::FetchBlocks{ledger_.height()});
  fetch_timer_ = kernel_.ScheduleAfter(cfg_.fetch_retry, self_, "peer.fetch_retry",
                                       [this] {
                                         fetch_timer_.reset();
                                         if (!pending_.empty()) RequestMissing();
                                       });
}

}  // namespace iod::txflow
