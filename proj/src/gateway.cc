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

#include "iod/txflow/gateway.h"

#include <algorithm>
#include <utility>

#include "absl/strings/str_cat.h"
#include "iod/ordering/orderer.h"
#include "iod/txflow/contracts.h"

namespace iod::txflow {

Gateway::Gateway(net::Network& net, NodeId self, ledger::IdentityId identity,
                 std::vector<NodeId> endorsers, std::vector<NodeId> orderers,
                 GatewayConfig cfg)
    : net_(net),
      kernel_(net.kernel()),
      self_(self),
      identity_(std::move(identity)),
      endorsers_(std::move(endorsers)),
      cfg_(cfg),
      submitter_(net, self, std::move(orderers), cfg.submit) {}

void Gateway::Install() {
  net_.SetReceiver(self_, [this](const net::Datagram& d) { OnDatagram(d); });
}

bool Gateway::OnDatagram(const net::Datagram& d) {
  if (d.tag == kTagEndorsement) {
    OnEndorsement(std::any_cast<const ProposalResponse&>(d.payload));
  } else if (d.tag == kTagCommit) {
    OnCommit(std::any_cast<const CommitEvent&>(d.payload));
  } else if (d.tag == kTagQueryReply) {
    OnQueryReply(d, std::any_cast<const QueryResponse&>(d.payload));
  } else if (d.tag == ordering::kTagSubmitReply) {
    submitter_.OnReply(d);
  } else {
    return false;
  }
  return true;
}

void Gateway::Send(NodeId dst, const char* tag, size_t bytes,
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

absl::StatusOr<uint64_t> Gateway::Invoke(const std::string& contract,
                                         const std::string& function,
                                         const std::string& args,
                                         std::optional<uint64_t> attachment_bytes,
                                         TxCallback done) {
  auto spec = LookupFunction(contract, function);
  if (!spec.ok()) return spec.status();
  if ((*spec)->read_only) {
    return absl::InvalidArgumentError(
        absl::StrCat("NotAnInvoke: ", contract, ".", function));
  }
  return StartInvoke(contract, function, args,
                     attachment_bytes.value_or((*spec)->payload_bytes), 0,
                     std::move(done));
}

uint64_t Gateway::StartInvoke(const std::string& contract,
                              const std::string& function,
                              const std::string& args, uint64_t attachment_bytes,
                              int attempt, TxCallback done) {
  ledger::Transaction tx;
  tx.kind = ledger::TxKind::kInvoke;
  tx.creator = identity_;
  tx.contract = contract;
  tx.function = function;
  tx.args = args;
  tx.nonce = next_nonce_++;
  tx.created = kernel_.now();
  tx.attachment_bytes = attachment_bytes;
  tx.tx_id = ledger::ComputeTxId(tx);

  TxReceipt r;
  r.seq = receipts_.size();
  r.tx_id = tx.tx_id;
  r.contract = contract;
  r.function = function;
  r.args = args;
  r.attachment_bytes = attachment_bytes;
  r.proposed_at = kernel_.now();
  r.attempt = attempt;
  receipts_.push_back(r);
  by_tx_id_[tx.tx_id] = r.seq;

  const uint64_t rid = next_request_id_++;
  Proposal& p = proposals_[rid];
  p.seq = r.seq;
  p.tx = tx;
  p.done = std::move(done);
  for (NodeId e : endorsers_) {
    Send(e, kTagPropose, ledger::WireSize(tx), ProposalRequest{rid, tx});
  }
  p.timer = kernel_.ScheduleAfter(cfg_.endorse_timeout, self_,
                                  "gateway.endorse_timeout", [this, rid] {
                                    auto it = proposals_.find(rid);
                                    if (it == proposals_.end()) return;
                                    it->second.timer.reset();
                                    Decide(rid);
                                  });
  return r.seq;
}

void Gateway::OnEndorsement(const ProposalResponse& r) {
  auto it = proposals_.find(r.request_id);
  if (it == proposals_.end()) return;
  it->second.responses.push_back(r);
  if (it->second.responses.size() == endorsers_.size()) Decide(r.request_id);
}

void Gateway::Fail(Proposal& p, std::string error) {
  TxReceipt& r = receipts_[p.seq];
  r.error = std::move(error);
  // Callbacks may start new invokes, which grow receipts_.
  const TxReceipt snapshot = r;
  if (p.done) p.done(snapshot);
}

void Gateway::Decide(uint64_t request_id) {
  auto node = proposals_.extract(request_id);
  Proposal& p = node.mapped();
  if (p.timer) kernel_.Cancel(*p.timer);
  TxReceipt& receipt = receipts_[p.seq];

  // Endorsements only combine when they sign identical bytes.
  std::map<std::string, std::vector<const ProposalResponse*>> groups;
  std::vector<std::string> errors;
  for (const ProposalResponse& r : p.responses) {
    if (!r.ok) {
      errors.push_back(r.error);
      continue;
    }
    ledger::Transaction t = p.tx;
    t.read_set = r.read_set;
    t.write_set = r.write_set;
    t.response = r.response;
    groups[ledger::EndorsementPayload(t)].push_back(&r);
  }
  const std::vector<const ProposalResponse*>* best = nullptr;
  for (const auto& [payload, members] : groups) {
    if (!best || members.size() > best->size()) best = &members;
  }
  if (best == nullptr || best->size() < cfg_.threshold) {
    bool diverged = false;
    const ProposalResponse* first = nullptr;
    for (const auto& [payload, members] : groups) {
      for (const ProposalResponse* m : members) {
        if (first == nullptr) {
          first = m;
        } else if (m->write_set != first->write_set ||
                   m->response != first->response) {
          diverged = true;
        }
      }
    }
    if (diverged) return Fail(p, "EndorsementMismatch");
    const bool same_error =
        groups.empty() && !errors.empty() &&
        std::all_of(errors.begin(), errors.end(),
                    [&](const std::string& e) { return e == errors[0]; });
    receipt.endorsements = best ? static_cast<int>(best->size()) : 0;
    return Fail(p, same_error ? errors[0] : "PolicyUnsatisfied");
  }

  ledger::Transaction tx = p.tx;
  const ProposalResponse& lead = *best->front();
  tx.read_set = lead.read_set;
  tx.write_set = lead.write_set;
  tx.response = lead.response;
  for (const ProposalResponse* m : *best) tx.endorsements.push_back(m->endorsement);
  std::sort(tx.endorsements.begin(), tx.endorsements.end(),
            [](const auto& a, const auto& b) { return a.peer < b.peer; });
  receipt.endorsed_at = kernel_.now();
  receipt.endorsements = static_cast<int>(tx.endorsements.size());
  receipt.response = tx.response;
  receipt.wire_bytes = ledger::WireSize(tx);
  awaiting_commit_[tx.tx_id] = std::move(p.done);
  submitter_.Submit(tx);
}

void Gateway::OnCommit(const CommitEvent& ev) {
  for (const auto& [tx_id, flag] : ev.results) {
    auto w = awaiting_commit_.find(tx_id);
    if (w == awaiting_commit_.end()) continue;  // not ours, or seen already
    TxCallback done = std::move(w->second);
    awaiting_commit_.erase(w);
    submitter_.MarkCommitted(tx_id);
    TxReceipt& r = receipts_[by_tx_id_.at(tx_id)];
    r.committed_at = kernel_.now();
    r.flag = flag;
    r.block = ev.block;
    if (flag == ledger::ValidityFlag::kInvalidVersionConflict &&
        r.attempt < cfg_.conflict_retries) {
      // Re-run against fresher state under a new transaction id.
      // StartInvoke grows receipts_, so copy what it needs out of `r`.
      const TxReceipt old = r;
      const uint64_t seq = old.seq;
      const uint64_t next =
          StartInvoke(old.contract, old.function, old.args,
                      old.attachment_bytes, old.attempt + 1, std::move(done));
      receipts_[seq].retried_as = next;
      continue;
    }
    const TxReceipt snapshot = r;
    if (done) done(snapshot);
  }
}

absl::Status Gateway::Query(const std::string& contract,
                            const std::string& function,
                            const std::string& args, QueryCallback done) {
  auto spec = LookupFunction(contract, function);
  if (!spec.ok()) return spec.status();
  if (!(*spec)->read_only) {
    return absl::InvalidArgumentError(
        absl::StrCat("NotAQuery: ", contract, ".", function));
  }
  if (endorsers_.empty()) {
    return absl::UnavailableError("PeerUnreachable: no peers configured");
  }
  const uint64_t rid = next_request_id_++;
  QueryRecord rec;
  rec.seq = query_log_.size();
  rec.contract = contract;
  rec.function = function;
  rec.issued_at = kernel_.now();
  query_log_.push_back(rec);
  PendingQuery& q = pending_queries_[rid];
  q.seq = rec.seq;
  q.req = {rid, identity_, contract, function, args};
  q.done = std::move(done);
  SendQuery(rid);
  return absl::OkStatus();
}

void Gateway::SendQuery(uint64_t request_id) {
  PendingQuery& q = pending_queries_.at(request_id);
  if (q.next_peer == endorsers_.size()) {
    QueryCallback done = std::move(q.done);
    query_log_[q.seq].error = "PeerUnreachable";
    pending_queries_.erase(request_id);
    if (done) done(absl::UnavailableError("PeerUnreachable"));
    return;
  }
  const NodeId peer = endorsers_[q.next_peer++];
  Send(peer, kTagQuery,
       ordering::kControlBytes + q.req.args.size() + q.req.function.size(),
       q.req);
  q.timer = kernel_.ScheduleAfter(cfg_.query_timeout, self_,
                                  "gateway.query_timeout", [this, request_id] {
                                    auto it = pending_queries_.find(request_id);
                                    if (it == pending_queries_.end()) return;
                                    it->second.timer.reset();
                                    SendQuery(request_id);
                                  });
}

void Gateway::OnQueryReply(const net::Datagram& d, const QueryResponse& r) {
  auto it = pending_queries_.find(r.request_id);
  if (it == pending_queries_.end()) return;
  PendingQuery q = std::move(it->second);
  pending_queries_.erase(it);
  if (q.timer) kernel_.Cancel(*q.timer);
  QueryRecord& rec = query_log_[q.seq];
  rec.answered_at = kernel_.now();
  rec.reply_bytes = d.size_bytes;
  rec.error = r.error;
  if (!q.done) return;
  if (r.ok) {
    q.done(r.value);
  } else {
    q.done(absl::FailedPreconditionError(r.error));
  }
}

}  // namespace iod::txflow
