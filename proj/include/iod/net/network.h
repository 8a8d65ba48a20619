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

#ifndef IOD_NET_NETWORK_H_
#define IOD_NET_NETWORK_H_

#include <any>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "iod/sim/kernel.h"
#include "iod/sim/time.h"

namespace iod::net {

enum class NodeRole { kSmallDrone, kLeader, kGateway, kEdgeSink, kOrderer, kPeer };
enum class LinkKind { kSmallToLeader, kLeaderToLeader, kLeaderToEdge, kEdgeToEdge };
enum class LinkState { kUp, kDown };
enum class DropReason { kNone, kNoLink, kLinkDown, kOutOfRange, kLoss };
enum class SendKind { kDatagram, kFrame, kBulk };

const char* RoleName(NodeRole r);
const char* LinkKindName(LinkKind k);
const char* DropReasonName(DropReason r);
bool IsLeaderRole(NodeRole r);  // kLeader or kGateway
bool IsEdgeRole(NodeRole r);    // boat-side servers

inline constexpr size_t kMaxDatagramBytes = 65508;

struct FrameLatency {
  double min_ms = 200;
  double max_ms = 300;
  double decision_ms = 300;
};

/// Per-node radio: range, datagram latency line, frame envelope and power.
struct RadioProfile {
  double range_m = 1000;
  double datagram_intercept_ms = 0;
  double datagram_slope_ms_per_byte = 0;
  double datagram_jitter_ms = 0;  // uniform extra in [0, jitter]; 0 = off
  FrameLatency frame;
  double tx_power_mw = 3250;
  double idle_on_power_mw = 450;
  double loss_probability = 0;

  absl::Status Validate() const;
  /// intercept + slope * bytes, without jitter.
  double DatagramLatencyMs(size_t bytes) const;
};

/// The one-way UDP latencies measured between a small and a big drone.
inline constexpr size_t kTableSmallBytes = 10000;
inline constexpr double kTableSmallMs = 3.7;
inline constexpr double kTableMaxMs = 5.6;

/// Wi-Fi profile whose datagram line passes through both measured points.
RadioProfile DefaultWifiProfile(double range_m);
/// Wired/virtual LAN between edge servers on the boat.
RadioProfile EdgeLanProfile();

/// Straight-line movement at constant speed, starting at `depart`.
struct Motion {
  Vec2 from;
  Vec2 to;
  SimTime depart;
  double speed_mps = 1;

  Vec2 At(SimTime t) const;
  SimTime Arrival() const;
};

struct NodeInfo {
  std::string name;
  NodeRole role = NodeRole::kEdgeSink;
  int cluster = -1;
  RadioProfile radio;
};

struct Datagram {
  NodeId src;
  NodeId dst;
  size_t size_bytes = 1;
  std::string tag;
  uint64_t msg_id = 0;
  std::any payload;
};

struct DeliveryOutcome {
  NodeId peer;
  bool delivered = false;
  SimTime deliver_at;
  double latency_ms = 0;
  double tx_energy_mj = 0;
  DropReason reason = DropReason::kNone;
};

/// One send attempt, recorded at send time.
struct SendRecord {
  SimTime at;
  NodeId src;
  NodeId dst;
  std::string tag;
  size_t bytes = 0;
  SendKind kind = SendKind::kDatagram;
  bool transmitted = false;  // left the radio (delivered or lost in the air)
  bool delivered = false;
  SimTime deliver_at;
  double latency_ms = 0;  // air time; FIFO may hold delivery later
  double tx_energy_mj = 0;
  DropReason reason = DropReason::kNone;
};

/// Simulated radio/LAN fabric driven by a Kernel.
///
/// Delivery happens at send time + latency through a kernel event, so link
/// changes never affect datagrams already in flight. Deliveries on each
/// directed pair are FIFO.
class Network {
 public:
  using Receiver = std::function<void(const Datagram&)>;
  using TxEnergyHook = std::function<void(NodeId, double mj)>;

  explicit Network(Kernel& kernel);

  Kernel& kernel() { return kernel_; }

  absl::Status Attach(NodeId id, NodeInfo info, Vec2 position,
                      Receiver receiver = nullptr);
  bool attached(NodeId id) const { return nodes_.count(id) != 0; }
  const NodeInfo& info(NodeId id) const { return nodes_.at(id).info; }
  std::optional<NodeId> FindByName(const std::string& name) const;
  std::vector<NodeId> Nodes() const;
  void SetReceiver(NodeId id, Receiver receiver);
  RadioProfile& mutable_radio(NodeId id) { return nodes_.at(id).info.radio; }

  void SetPosition(NodeId id, Vec2 p);
  void SetMotion(NodeId id, const Motion& m);
  Vec2 PositionOf(NodeId id) const;

  /// Validates the link kind against both endpoints' roles.
  absl::Status AddLink(NodeId a, NodeId b, LinkKind kind);
  bool HasLink(NodeId a, NodeId b) const;
  absl::StatusOr<LinkKind> KindOf(NodeId a, NodeId b) const;
  /// NotFound ("UnknownLink") when no such link exists.
  absl::Status SetLinkState(NodeId a, NodeId b, LinkState s);
  absl::StatusOr<LinkState> StateOf(NodeId a, NodeId b) const;
  /// Applies `s` at time `at` through a kernel event.
  absl::Status ScheduleLinkState(SimTime at, NodeId a, NodeId b, LinkState s);
  void SetLossProbability(NodeId a, NodeId b, double p);

  /// Distance <= min(range a, range b); closed boundary.
  absl::StatusOr<bool> InRange(NodeId a, NodeId b) const;
  /// Link present, Up, and in range right now.
  bool CanReach(NodeId a, NodeId b) const;

  /// Control-sized message; size must be in [1, 65508].
  absl::StatusOr<DeliveryOutcome> SendDatagram(Datagram d);
  /// Camera frame over the measured frame-latency envelope.
  absl::StatusOr<DeliveryOutcome> SendFrame(Datagram d);
  /// Large message (ledger traffic, bulk sync) on the datagram line, uncapped.
  absl::StatusOr<DeliveryOutcome> SendBulk(Datagram d);

  /// Leader/gateway neighbors connected by a LeaderToLeader link.
  std::vector<NodeId> AdjacentLeaders(NodeId leader) const;
  /// Sends `d` (dst ignored) to every adjacent leader; one outcome each.
  absl::StatusOr<std::vector<DeliveryOutcome>> MulticastAdjacent(NodeId leader,
                                                                 Datagram d);

  /// When false, frames take exactly the planning latency.
  void set_frame_jitter(bool on) { frame_jitter_ = on; }
  void set_tx_energy_hook(TxEnergyHook hook) { tx_hook_ = std::move(hook); }
  void set_lan_profile(const RadioProfile& p) { lan_ = p; }
  const RadioProfile& lan_profile() const { return lan_; }

  const std::vector<SendRecord>& sends() const { return sends_; }
  double tx_energy_mj(NodeId id) const;
  /// Delivered datagrams in delivery order: (time, src, dst, tag).
  struct DeliveryRecord {
    SimTime at;
    NodeId src;
    NodeId dst;
    std::string tag;
  };
  const std::vector<DeliveryRecord>& deliveries() const { return deliveries_; }

 private:
  struct Node {
    NodeInfo info;
    Vec2 position;
    std::optional<Motion> motion;
    Receiver receiver;
  };
  struct Link {
    LinkKind kind;
    LinkState state = LinkState::kUp;
    double loss_probability = 0;
  };
  using Key = std::pair<uint32_t, uint32_t>;
  static Key KeyOf(NodeId a, NodeId b);

  absl::StatusOr<DeliveryOutcome> Send(Datagram d, SendKind kind);
  double LatencyFor(const Link& link, const Node& src, const Node& dst,
                    SendKind kind, size_t bytes);

  Kernel& kernel_;
  std::map<NodeId, Node> nodes_;
  std::map<Key, Link> links_;
  std::map<std::pair<uint32_t, uint32_t>, SimTime> last_delivery_;
  std::map<NodeId, double> tx_energy_;
  std::vector<SendRecord> sends_;
  std::vector<DeliveryRecord> deliveries_;
  RadioProfile lan_;
  bool frame_jitter_ = true;
  TxEnergyHook tx_hook_;
};

}  // namespace iod::net

#endif  // IOD_NET_NETWORK_H_
