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

#ifndef IOD_FLEET_MISSION_H_
#define IOD_FLEET_MISSION_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "iod/device/battery.h"
#include "iod/device/profiles.h"
#include "iod/fleet/sweep.h"
#include "iod/net/network.h"
#include "iod/policy/offload.h"
#include "iod/sim/kernel.h"
#include "iod/sim/random.h"
#include "iod/txflow/contracts.h"
#include "iod/txflow/gateway.h"

namespace iod::fleet {

enum class NodeKind { kSmallDrone, kBigDroneLeader, kGateway, kEdgeSink };
enum class FlightStatus { kFlying, kReturning, kAtBoat, kDepleted };
enum class DetectionStage { kFirstPass, kVerified };
enum class EnergyKind { kHover, kProcessing, kTx, kIdleRadio };
inline constexpr int kEnergyKinds = 4;

const char* NodeKindName(NodeKind k);
const char* FlightStatusName(FlightStatus s);
const char* StageName(DetectionStage s);
const char* EnergyKindName(EnergyKind k);

struct Storage {
  uint64_t used_bytes = 0;
  uint64_t capacity_bytes = 0;
  bool Fits(uint64_t bytes) const { return used_bytes + bytes <= capacity_bytes; }
};

/// Energy drawn from one battery, by cause, in integer microjoules so that
/// the drop and the causes can be compared exactly.
class EnergyBook {
 public:
  EnergyBook() = default;
  explicit EnergyBook(double capacity_mj);

  /// Clamped at empty. Returns the microjoules actually removed.
  int64_t Drain(EnergyKind kind, int64_t uj);
  /// Battery swap: the current sortie's drop is banked.
  void Swap();

  int64_t capacity_uj() const { return capacity_uj_; }
  int64_t remaining_uj() const { return remaining_uj_; }
  int64_t by_kind(EnergyKind k) const { return by_kind_[static_cast<int>(k)]; }
  int64_t total_by_kind() const;
  /// Sum over sorties of capacity minus charge left at the swap, plus the
  /// current sortie.
  int64_t total_drop() const {
    return banked_drop_uj_ + capacity_uj_ - remaining_uj_;
  }
  int sorties() const { return sorties_; }
  bool balanced() const { return total_by_kind() == total_drop(); }

 private:
  int64_t capacity_uj_ = 0;
  int64_t remaining_uj_ = 0;
  int64_t banked_drop_uj_ = 0;
  int64_t by_kind_[kEnergyKinds] = {};
  int sorties_ = 1;
};

int64_t ToMicrojoules(double mj);

struct FrameRef {
  uint64_t frame_id = 0;
  NodeId source;
  SimTime captured_at;
  uint64_t size_bytes = 2'300'000;
  Rect footprint;
  // Ground truth. Detection only sees it through the outcome draw.
  bool contains_victim = false;
};

struct DetectionOutcome {
  uint64_t frame_id = 0;
  device::AlgorithmId algorithm;
  bool positive = false;
  bool truth = false;
  DetectionStage stage = DetectionStage::kFirstPass;
};

/// accuracy (+ boost, capped) on a frame with a victim, else the false
/// positive rate.
double PositiveProbability(const device::AlgorithmEntry& e, bool truth,
                           double boost, double cap);

DetectionOutcome Detect(const FrameRef& frame, const device::AlgorithmId& algo,
                        const device::AlgorithmEntry& entry, DetectionStage stage,
                        double boost, double cap, RandomStream& rng);

struct Victim {
  int victim_id = 0;
  Vec2 position;
  std::optional<SimTime> discovered_at;
  std::optional<SimTime> reported_at;
};

struct NodeState {
  NodeId id;
  std::string name;
  NodeKind kind = NodeKind::kSmallDrone;
  int cluster = -1;
  FlightStatus status = FlightStatus::kAtBoat;
  device::Battery battery;
  EnergyBook book;
  Storage storage;
  // Frames and bytes held for the next docking sync.
  uint64_t stored_frames = 0;
  double hover_w = 0;
  double speed_mps = 0;
  const device::DeviceProfile* board = nullptr;
  device::PowerModeId mode;
  device::AlgorithmId algorithm;  // leader detector
};

struct ClusterLayout {
  Rect sub_area;
  int small_drones = 4;
  // Defaults to the centre of the sub-area.
  std::optional<Vec2> leader_station;
  device::PowerModeId leader_mode = device::kJetson10W4Core;
  device::AlgorithmId leader_algorithm = device::kYoloV3Tiny;
  device::PowerModeId small_mode = device::kIntelUpMode;
  std::vector<device::AlgorithmId> small_candidates;  // empty = all
};

struct MissionConfig {
  device::DefaultProfiles profiles = device::MakeDefaultProfiles();
  net::RadioProfile small_radio = net::DefaultWifiProfile(1000);
  net::RadioProfile leader_radio = net::DefaultWifiProfile(1000);
  std::vector<ClusterLayout> clusters;
  // Relay-only big drones hovering at these points.
  std::vector<Vec2> gateways;
  Vec2 boat;
  std::vector<Vec2> victims;
  policy::PolicyConfig policy;
  CameraModel camera;
  uint64_t frame_bytes = 2'300'000;
  uint64_t small_storage_bytes = 32ull << 30;
  uint64_t leader_storage_bytes = 256ull << 30;
  size_t control_bytes = 512;
  SimTime capture_period = SimTime::FromSeconds(1);
  SimTime mission_end = SimTime::FromSeconds(600);
  SimTime turnaround = SimTime::FromSeconds(120);
  SimTime status_period = SimTime::FromSeconds(60);
  SimTime relay_window = SimTime::FromMillis(50);
  double verify_boost = 0.10;
  double verify_cap = 0.99;
  // The leader stops this far from the target; zoom does the rest.
  double verify_standoff_m = 100;
  double urgent_fraction = 0.5;
  NodeId edge{1};
  uint32_t first_node_id = 10;
  // Ledger seed data registered by the edge at start.
  std::vector<txflow::RescueTeamRecord> teams;
  std::vector<txflow::HospitalRecord> hospitals;
};

// ---- Logs -------------------------------------------------------------------

struct FrameDecisionRecord {
  SimTime at;
  NodeId node;
  uint64_t frame_id = 0;
  policy::ActionKind action = policy::ActionKind::kOffload;
  bool by_rule = false;
  bool link_up = false;
  bool truth = false;
  bool sent = false;  // offloaded and accepted by the radio
};

struct DetectionRecord {
  SimTime at;
  NodeId node;
  DetectionOutcome outcome;
  Vec2 target;
};

enum class RouteKind { kDirect, kRelayed, kQueued };
const char* RouteName(RouteKind r);

/// One Verified positive and what became of it.
struct UrgentRecord {
  uint64_t msg_id = 0;
  NodeId leader;
  SimTime verified_at;
  Vec2 location;
  std::string urgency;
  std::vector<int> victims;  // ground truth inside the verification footprint
  RouteKind route = RouteKind::kDirect;
  std::optional<NodeId> relay;
  std::optional<SimTime> delivered_at;
  std::optional<uint64_t> ledger_seq;
};

enum class EdgeArrival { kLive, kRelayed, kSyncUrgent, kSyncBulk };
const char* ArrivalName(EdgeArrival a);

struct EdgeReceipt {
  SimTime at;
  NodeId from;
  NodeId origin;
  EdgeArrival how = EdgeArrival::kLive;
  uint64_t msg_id = 0;  // 0 for bulk sync
  uint64_t bytes = 0;
  uint64_t frames = 0;
  bool duplicate = false;
};

enum class RelayResult { kForwarded, kNoRelayPath };

struct RelayRecord {
  SimTime at;
  NodeId leader;
  uint64_t msg_id = 0;
  RelayResult result = RelayResult::kForwarded;
  std::optional<NodeId> relay;
  std::optional<Vec2> edge_position;
};

enum class ReturnReason { kLowBattery, kSweepDone, kMissionEnd };
const char* ReturnReasonName(ReturnReason r);

struct ReturnRecord {
  NodeId node;
  ReturnReason reason = ReturnReason::kMissionEnd;
  SimTime departed;
  std::optional<SimTime> arrived;
  bool depleted_en_route = false;
  uint64_t synced_bytes = 0;
  uint64_t synced_urgent = 0;
};

struct StatusUpdateRecord {
  SimTime at;
  NodeId leader;
  std::optional<uint64_t> ledger_seq;
};

/// Drones, gateways and the boat's edge sink on one kernel timeline.
///
/// Create attaches every fleet node and the edge to the network and wires
/// the links. A ledger gateway for the edge may be attached before Start;
/// without one, reports are only logged.
class Mission {
 public:
  static absl::StatusOr<std::unique_ptr<Mission>> Create(net::Network& net,
                                                         MissionConfig cfg);
  ~Mission();

  void AttachLedger(txflow::Gateway* gateway) { ledger_ = gateway; }
  /// Launches everything from the boat and schedules the mission end.
  absl::Status Start();

  /// Every drone is home or lost, after the mission end.
  bool finished() const;

  const MissionConfig& config() const { return cfg_; }
  const SweepPlan& plan(int cluster) const { return plans_.at(cluster); }
  const std::map<NodeId, NodeState>& nodes() const { return nodes_; }
  const NodeState& node(NodeId id) const { return nodes_.at(id); }
  std::vector<NodeId> leaders() const;
  std::vector<NodeId> small_drones() const;
  std::vector<NodeId> gateways() const;
  const std::vector<Victim>& victims() const { return victims_; }

  const std::vector<FrameDecisionRecord>& decisions() const { return decisions_; }
  const std::vector<DetectionRecord>& detections() const { return detections_; }
  const std::vector<UrgentRecord>& urgent() const { return urgent_; }
  const std::vector<EdgeReceipt>& edge_receipts() const { return edge_log_; }
  const std::vector<RelayRecord>& relays() const { return relay_log_; }
  const std::vector<ReturnRecord>& returns() const { return return_log_; }
  const std::vector<StatusUpdateRecord>& status_updates() const {
    return status_log_;
  }
  uint64_t frames_captured() const { return frames_captured_; }
  uint64_t duplicate_first_pass() const { return duplicate_first_pass_; }
  uint64_t dropped_frames() const { return dropped_frames_; }
  uint64_t abandoned_verifications() const { return abandoned_verifications_; }
  /// Hover and idle-radio time are charged up to now for flying nodes.
  void SettleEnergy();

  // Exposed for tests that drive single steps.
  void ReturnToBoat(NodeId id, ReturnReason reason);
  void LeaderOnDetection(NodeId leader, Vec2 target, uint64_t frame_id);
  void FallbackRelay(NodeId leader, uint64_t msg_id);

 private:
  struct Runtime;
  struct Job;

  Mission(net::Network& net, MissionConfig cfg);
  absl::Status Build();

  NodeState& state(NodeId id) { return nodes_.at(id); }
  Runtime& rt(NodeId id);
  bool Active(const NodeState& n) const;
  void Accrue(NodeId id);
  void Drain(NodeId id, EnergyKind kind, double mj);
  void OnDepleted(NodeId id);
  void StartTicks(NodeId id);
  void OnTick(NodeId id);
  void MoveTo(NodeId id, Vec2 to, const std::string& tag,
              std::function<void()> on_arrival);
  void StopMoving(NodeId id);
  void Launch(NodeId id);

  void Capture(NodeId id);
  void SmallNextLeg(NodeId id);
  void RunOnBoard(NodeId id, Job job);
  void FinishJob(NodeId id);
  void OnDatagram(NodeId self, const net::Datagram& d);
  void OnEdgeDatagram(const net::Datagram& d);

  void NextVerification(NodeId leader);
  void OnVerifyArrive(NodeId leader);
  void OnVerified(NodeId leader, const FrameRef& frame, const DetectionOutcome& o);
  void RouteUrgent(NodeId leader, uint64_t msg_id);
  void CloseRelayWindow(NodeId leader, uint64_t probe_id);
  void SendStatus(NodeId leader);

  void OnArrival(NodeId id);
  void OnEdgeUrgent(NodeId from, uint64_t msg_id, EdgeArrival how, uint64_t bytes);
  void SeedLedger();
  void EndMission();

  net::Network& net_;
  Kernel& kernel_;
  MissionConfig cfg_;
  std::map<NodeId, NodeState> nodes_;
  std::map<NodeId, std::unique_ptr<Runtime>> runtime_;
  std::vector<SweepPlan> plans_;
  std::vector<Victim> victims_;
  txflow::Gateway* ledger_ = nullptr;
  bool ended_ = false;
  int pending_syncs_ = 0;

  std::vector<FrameDecisionRecord> decisions_;
  std::vector<DetectionRecord> detections_;
  std::vector<UrgentRecord> urgent_;
  std::map<uint64_t, size_t> urgent_index_;
  std::vector<EdgeReceipt> edge_log_;
  std::vector<RelayRecord> relay_log_;
  std::vector<ReturnRecord> return_log_;
  std::vector<StatusUpdateRecord> status_log_;
  std::map<uint64_t, bool> edge_seen_;
  uint64_t next_frame_id_ = 1;
  uint64_t next_msg_id_ = 1;
  uint64_t frames_captured_ = 0;
  uint64_t duplicate_first_pass_ = 0;
  uint64_t dropped_frames_ = 0;
  uint64_t abandoned_verifications_ = 0;
};

}  // namespace iod::fleet

#endif  // IOD_FLEET_MISSION_H_
