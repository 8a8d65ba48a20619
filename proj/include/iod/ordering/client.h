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

#ifndef IOD_ORDERING_CLIENT_H_
#define IOD_ORDERING_CLIENT_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "iod/ledger/block.h"
#include "iod/net/network.h"
#include "iod/ordering/orderer.h"
#include "iod/sim/kernel.h"

namespace iod::ordering {

struct SubmitterConfig {
  // No reply from the chosen orderer within this long: try the next one.
  SimTime reply_timeout = SimTime::FromMillis(250);
  // Wait after NoLeader before trying again.
  SimTime backoff = SimTime::FromMillis(100);
  // Accepted but not seen committed within this long: submit again. The
  // leader may have died or been cut off holding the pending batch.
  SimTime resubmit_after = SimTime::FromMillis(2250);
  // After giving up on an orderer, redirects pointing back at it are treated
  // as NoLeader for this long; other orderers may not have noticed yet.
  SimTime suspect_for = SimTime::FromMillis(600);
};

/// Client side of submission: finds the leader through redirects, retries
/// through elections and resubmits transactions that were accepted but
/// never committed. Validation deduplicates by tx id, so resubmission is
/// at-least-once safe.
class Submitter {
 public:
  Submitter(net::Network& net, NodeId self, std::vector<NodeId> orderers,
            SubmitterConfig cfg = {});

  Submitter(const Submitter&) = delete;
  Submitter& operator=(const Submitter&) = delete;

  void Submit(const ledger::Transaction& tx);
  /// Feed datagrams tagged kTagSubmitReply here.
  void OnReply(const net::Datagram& d);
  /// Stops retrying once the transaction is seen in a committed block.
  void MarkCommitted(const ledger::Digest& tx_id);

  size_t in_flight() const { return inflight_.size(); }
  uint64_t messages_sent() const { return messages_sent_; }
  uint64_t resubmissions() const { return resubmissions_; }
  uint64_t rejected() const { return rejected_; }
  std::optional<NodeId> leader_hint() const { return leader_hint_; }

 private:
  struct Inflight {
    ledger::Transaction tx;
    NodeId target;
    std::optional<EventId> timer;
    std::optional<NodeId> suspect;
    SimTime suspect_until;
  };

  void SendTo(const ledger::Digest& id, NodeId target);
  void Arm(const ledger::Digest& id, SimTime delay, const char* tag,
           std::function<void(Inflight&)> fire);
  NodeId After(NodeId n) const;

  net::Network& net_;
  Kernel& kernel_;
  NodeId self_;
  std::vector<NodeId> orderers_;
  SubmitterConfig cfg_;
  std::map<ledger::Digest, Inflight> inflight_;
  std::optional<NodeId> leader_hint_;
  uint64_t next_msg_id_ = 1;
  uint64_t messages_sent_ = 0;
  uint64_t resubmissions_ = 0;
  uint64_t rejected_ = 0;
};

}  // namespace iod::ordering

#endif  // IOD_ORDERING_CLIENT_H_
