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

#include "iod/ordering/client.h"

#include <algorithm>
#include <utility>

namespace iod::ordering {

Submitter::Submitter(net::Network& net, NodeId self,
                     std::vector<NodeId> orderers, SubmitterConfig cfg)
    : net_(net),
      kernel_(net.kernel()),
      self_(self),
      orderers_(std::move(orderers)),
      cfg_(cfg) {}

NodeId Submitter::After(NodeId n) const {
  auto it = std::find(orderers_.begin(), orderers_.end(), n);
  if (it == orderers_.end() || ++it == orderers_.end()) return orderers_[0];
  return *it;
}

void Submitter::Submit(const ledger::Transaction& tx) {
  if (inflight_.contains(tx.tx_id)) return;
  const NodeId target = leader_hint_.value_or(orderers_[0]);
  Inflight& f = inflight_[tx.tx_id];
  f.tx = tx;
  f.target = target;
  SendTo(tx.tx_id, target);
}

void Submitter::Arm(const ledger::Digest& id, SimTime delay, const char* tag,
                    std::function<void(Inflight&)> fire) {
  Inflight& f = inflight_.at(id);
  if (f.timer) kernel_.Cancel(*f.timer);
  f.timer = kernel_.ScheduleAfter(delay, self_, tag, [this, id, fire] {
    auto it = inflight_.find(id);
    if (it == inflight_.end()) return;
    it->second.timer.reset();
    fire(it->second);
  });
}

void Submitter::SendTo(const ledger::Digest& id, NodeId target) {
  Inflight& f = inflight_.at(id);
  f.target = target;
  net::Datagram d;
  d.src = self_;
  d.dst = target;
  d.size_bytes = ledger::WireSize(f.tx);
  d.tag = kTagSubmit;
  d.msg_id = next_msg_id_++;
  d.payload = SubmitTx{f.tx};
  ++messages_sent_;
  (void)net_.SendBulk(std::move(d));
  Arm(id, cfg_.reply_timeout, "client.reply_timeout", [this, id](Inflight& f) {
    if (leader_hint_ == f.target) leader_hint_.reset();
    SendTo(id, After(f.target));
  });
}

void Submitter::OnReply(const net::Datagram& d) {
  const auto& reply = std::any_cast<const SubmitReply&>(d.payload);
  auto it = inflight_.find(reply.tx_id);
  if (it == inflight_.end() || it->second.target != d.src) return;
  const ledger::Digest id = reply.tx_id;
  switch (reply.status) {
    case SubmitStatus::kAccepted:
      leader_hint_ = d.src;
      Arm(id, cfg_.resubmit_after, "client.resubmit", [this, id](Inflight& f) {
        // The orderer that accepted has not delivered; ask a different one.
        ++resubmissions_;
        if (leader_hint_ == f.target) leader_hint_.reset();
        f.suspect = f.target;
        f.suspect_until = kernel_.now() + cfg_.suspect_for;
        SendTo(id, After(f.target));
      });
      break;
    case SubmitStatus::kRedirect:
      if (!(reply.leader && reply.leader == it->second.suspect &&
            kernel_.now() < it->second.suspect_until)) {
        leader_hint_ = reply.leader;
        SendTo(id, reply.leader.value_or(After(d.src)));
        break;
      }
      [[fallthrough]];
    case SubmitStatus::kNoLeader:
      Arm(id, cfg_.backoff, "client.backoff",
          [this, id](Inflight& f) { SendTo(id, After(f.target)); });
      break;
    case SubmitStatus::kRejected:
      ++rejected_;
      if (it->second.timer) kernel_.Cancel(*it->second.timer);
      inflight_.erase(it);
      break;
  }
}

void Submitter::MarkCommitted(const ledger::Digest& tx_id) {
  auto it = inflight_.find(tx_id);
  if (it == inflight_.end()) return;
  if (it->second.timer) kernel_.Cancel(*it->second.timer);
  inflight_.erase(it);
}

}  // namespace iod::ordering
