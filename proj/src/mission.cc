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

#include "iod/fleet/mission.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace iod::fleet {

using Json = nlohmann::json;

const char* NodeKindName(NodeKind k) {
  switch (k) {
    case NodeKind::kSmallDrone: return "SmallDrone";
    case NodeKind::kBigDroneLeader: return "BigDroneLeader";
    case NodeKind::kGateway: return "Gateway";
    case NodeKind::kEdgeSink: return "EdgeSink";
  }
  return "?";
}

const char* FlightStatusName(FlightStatus s) {
  switch (s) {
    case FlightStatus::kFlying: return "Flying";
    case FlightStatus::kReturning: return "Returning";
    case FlightStatus::kAtBoat: return "AtBoat";
    case FlightStatus::kDepleted: return "Depleted";
  }
  return "?";
}

const char* StageName(DetectionStage s) {
  return s == DetectionStage::kFirstPass ? "FirstPass" : "Verified";
}

const char* EnergyKindName(EnergyKind k) {
  switch (k) {
    case EnergyKind::kHover: return "hover";
    case EnergyKind::kProcessing: return "processing";
    case EnergyKind::kTx: return "tx";
    case EnergyKind::kIdleRadio: return "idle_radio";
  }
  return "?";
}

const char* RouteName(RouteKind r) {
  switch (r) {
    case RouteKind::kDirect: return "direct";
    case RouteKind::kRelayed: return "relayed";
    case RouteKind::kQueued: return "queued";
  }
  return "?";
}

const char* ArrivalName(EdgeArrival a) {
  switch (a) {
    case EdgeArrival::kLive: return "live";
    case EdgeArrival::kRelayed: return "relayed";
    case EdgeArrival::kSyncUrgent: return "sync_urgent";
    case EdgeArrival::kSyncBulk: return "sync_bulk";
  }
  return "?";
}

const char* ReturnReasonName(ReturnReason r) {
  switch (r) {
    case ReturnReason::kLowBattery: return "LowBattery";
    case ReturnReason::kSweepDone: return "SweepDone";
    case ReturnReason::kMissionEnd: return "MissionEnd";
  }
  return "?";
}

// ---- Energy ---------------------------------------------------------------------

int64_t ToMicrojoules(double mj) {
  return static_cast<int64_t>(std::llround(mj * 1000.0));
}

EnergyBook::EnergyBook(double capacity_mj)
    : capacity_uj_(ToMicrojoules(capacity_mj)), remaining_uj_(capacity_uj_) {}

int64_t EnergyBook::Drain(EnergyKind kind, int64_t uj) {
  const int64_t drawn = std::clamp<int64_t>(uj, 0, remaining_uj_);
  remaining_uj_ -= drawn;
  by_kind_[static_cast<int>(kind)] += drawn;
  return drawn;
}

void EnergyBook::Swap() {
  banked_drop_uj_ += capacity_uj_ - remaining_uj_;
  remaining_uj_ = capacity_uj_;
  ++sorties_;
}

int64_t EnergyBook::total_by_kind() const {
  int64_t s = 0;
  for (int64_t v : by_kind_) s += v;
  return s;
}

// ---- Detection ----------------------------------------------------------------------

double PositiveProbability(const device::AlgorithmEntry& e, bool truth,
                           double boost, double cap) {
  if (!truth) return e.false_positive_rate;
  if (boost == 0) return e.accuracy;
  return std::min(e.accuracy + boost, cap);
}

DetectionOutcome Detect(const FrameRef& frame, const device::AlgorithmId& algo,
                        const device::AlgorithmEntry& entry, DetectionStage stage,
                        double boost, double cap, RandomStream& rng) {
  DetectionOutcome o;
  o.frame_id = frame.frame_id;
  o.algorithm = algo;
  o.truth = frame.contains_victim;
  o.stage = stage;
  o.positive = rng.NextBernoulli(
      PositiveProbability(entry, frame.contains_victim, boost, cap));
  return o;
}

// ---- Wire messages ----------------------------------------------------------------

namespace {

constexpr char kTagFrame[] = "fleet.frame";
constexpr char kTagResult[] = "fleet.result";
constexpr char kTagProbe[] = "fleet.relay_probe";
constexpr char kTagOffer[] = "fleet.relay_offer";
constexpr char kTagRelayFrame[] = "fleet.relay_frame";
constexpr char kTagUrgent[] = "fleet.urgent";
constexpr char kTagStatus[] = "fleet.status";

struct FrameMsg {
  FrameRef frame;
};
struct ResultMsg {
  uint64_t frame_id = 0;
  bool positive = false;
  Vec2 target;
};
struct ProbeMsg {
  uint64_t msg_id = 0;
};
struct OfferMsg {
  uint64_t msg_id = 0;
  Vec2 edge_position;
};
struct UrgentMsgBody {
  uint64_t msg_id = 0;
  NodeId origin;
};
struct StatusMsg {
  NodeId leader;
  Vec2 position;
  double battery = 0;
};

}  // namespace

struct Mission::Job {
  DetectionStage stage = DetectionStage::kFirstPass;
  device::AlgorithmId algorithm;
  FrameRef frame;
};


struct Mission::Runtime {
  SimTime last_accrual;
  std::optional<EventId> tick;
  std::optional<EventId> move;
  std::optional<EventId> status_timer;
  std::optional<EventId> relaunch;
  NodeId leader;  // small drones: their cluster leader
  Vec2 home;      // leaders and gateways: station
  // Small drones.
  std::vector<Vec2> route;
  size_t next_waypoint = 0;
  // Board.
  std::deque<Job> board_queue;
  bool board_busy = false;
  // Leaders.
  struct Target {
    Vec2 at;
    uint64_t frame_id = 0;
  };
  std::deque<Target> verify_queue;
  std::optional<Target> verifying;
  std::vector<Rect> claimed;
  std::map<uint64_t, std::vector<std::pair<NodeId, Vec2>>> offers;
  std::optional<Vec2> edge_position;
  uint64_t status_count = 0;
  // Urgent messages waiting for the next docking.
  std::deque<uint64_t> outbox;
  std::optional<size_t> open_return;
};

Mission::Mission(net::Network& net, MissionConfig cfg)
    : net_(net), kernel_(net.kernel()), cfg_(std::move(cfg)) {}

Mission::~Mission() = default;

absl::StatusOr<std::unique_ptr<Mission>> Mission::Create(net::Network& net,
                                                         MissionConfig cfg) {
  std::unique_ptr<Mission> m(new Mission(net, std::move(cfg)));
  if (absl::Status s = m->Build(); !s.ok()) return s;
  return m;
}

Mission::Runtime& Mission::rt(NodeId id) { return *runtime_.at(id); }

absl::Status Mission::Build() {
  if (cfg_.clusters.empty()) {
    return absl::InvalidArgumentError("mission needs at least one cluster");
  }
  if (absl::Status s = cfg_.small_radio.Validate(); !s.ok()) return s;
  if (absl::Status s = cfg_.leader_radio.Validate(); !s.ok()) return s;
  const device::NodeClass& small = cfg_.profiles.small_drone;
  const device::NodeClass& big = cfg_.profiles.big_drone;
  const Vec2 fp = cfg_.camera.FootprintSize();

  net::NodeInfo edge;
  edge.name = "edge";
  edge.role = net::NodeRole::kEdgeSink;
  edge.radio = cfg_.leader_radio;
  if (absl::Status s = net_.Attach(cfg_.edge, edge, cfg_.boat); !s.ok()) return s;
  net_.SetReceiver(cfg_.edge, [this](const net::Datagram& d) { OnEdgeDatagram(d); });

  uint32_t next = cfg_.first_node_id;
  auto add = [&](NodeKind kind, std::string name, int cluster,
                 const device::NodeClass& cls,
                 const net::RadioProfile& radio) -> absl::StatusOr<NodeId> {
    const NodeId id{next++};
    net::NodeInfo info;
    info.name = name;
    info.role = kind == NodeKind::kSmallDrone  ? net::NodeRole::kSmallDrone
                : kind == NodeKind::kGateway ? net::NodeRole::kGateway
                                             : net::NodeRole::kLeader;
    info.cluster = cluster;
    info.radio = radio;
    if (absl::Status s = net_.Attach(id, info, cfg_.boat); !s.ok()) return s;
    net_.SetReceiver(id, [this, id](const net::Datagram& d) { OnDatagram(id, d); });
    NodeState n;
    n.id = id;
    n.name = std::move(name);
    n.kind = kind;
    n.cluster = cluster;
    n.battery = device::Battery(cls.battery_capacity_mj);
    n.book = EnergyBook(cls.battery_capacity_mj);
    n.storage.capacity_bytes = kind == NodeKind::kSmallDrone
                                   ? cfg_.small_storage_bytes
                                   : cfg_.leader_storage_bytes;
    n.hover_w = cls.hover_power_w;
    n.speed_mps = cls.speed_mps;
    n.board = &cls.board;
    nodes_[id] = std::move(n);
    runtime_[id] = std::make_unique<Runtime>();
    return id;
  };

  std::vector<NodeId> big_nodes;
  for (size_t c = 0; c < cfg_.clusters.size(); ++c) {
    const ClusterLayout& cl = cfg_.clusters[c];
    if (cl.small_drones < 1) {
      return absl::InvalidArgumentError("cluster needs at least one small drone");
    }
    if (!big.board.Entry(cl.leader_algorithm, cl.leader_mode).ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "leader detector ", cl.leader_algorithm, " has no entry in mode ",
          cl.leader_mode));
    }
    auto leader = add(NodeKind::kBigDroneLeader, absl::StrCat("leader", c),
                      static_cast<int>(c), big, cfg_.leader_radio);
    if (!leader.ok()) return leader.status();
    state(*leader).mode = cl.leader_mode;
    state(*leader).algorithm = cl.leader_algorithm;
    rt(*leader).home = cl.leader_station.value_or(cl.sub_area.center());
    big_nodes.push_back(*leader);

    const double power_w = small.hover_power_w + cfg_.small_radio.idle_on_power_mw / 1000;
    const double endurance_s = small.battery_capacity_mj / 1000.0 / power_w *
                               (1 - device::Battery().low_threshold_fraction());
    auto plan = PlanSweep(cl.sub_area, cl.small_drones, fp, small.speed_mps,
                          endurance_s);
    if (!plan.ok()) return plan.status();
    for (int k = 0; k < cl.small_drones; ++k) {
      auto s = add(NodeKind::kSmallDrone, absl::StrCat("small", c, "-", k),
                   static_cast<int>(c), small, cfg_.small_radio);
      if (!s.ok()) return s.status();
      state(*s).mode = cl.small_mode;
      rt(*s).leader = *leader;
      rt(*s).route = plan->waypoints[k];
      if (absl::Status st = net_.AddLink(*s, *leader, net::LinkKind::kSmallToLeader);
          !st.ok()) {
        return st;
      }
    }
    plans_.push_back(*std::move(plan));
  }
  for (size_t g = 0; g < cfg_.gateways.size(); ++g) {
    auto id = add(NodeKind::kGateway, absl::StrCat("gateway", g), -1, big,
                  cfg_.leader_radio);
    if (!id.ok()) return id.status();
    rt(*id).home = cfg_.gateways[g];
    big_nodes.push_back(*id);
  }
  for (size_t a = 0; a < big_nodes.size(); ++a) {
    if (absl::Status s = net_.AddLink(big_nodes[a], cfg_.edge, net::LinkKind::kLeaderToEdge);
        !s.ok()) {
      return s;
    }
    for (size_t b = a + 1; b < big_nodes.size(); ++b) {
      if (absl::Status s = net_.AddLink(big_nodes[a], big_nodes[b],
                                        net::LinkKind::kLeaderToLeader);
          !s.ok()) {
        return s;
      }
    }
  }

  for (size_t i = 0; i < cfg_.victims.size(); ++i) {
    victims_.push_back({static_cast<int>(i), cfg_.victims[i], {}, {}});
  }
  kernel_.streams().Register("detection");
  kernel_.streams().Register("triage");
  net_.set_tx_energy_hook([this](NodeId id, double mj) {
    if (nodes_.count(id)) Drain(id, EnergyKind::kTx, mj);
  });
  return absl::OkStatus();
}

std::vector<NodeId> Mission::leaders() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes_) {
    if (n.kind == NodeKind::kBigDroneLeader) out.push_back(id);
  }
  return out;
}

std::vector<NodeId> Mission::small_drones() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes_) {
    if (n.kind == NodeKind::kSmallDrone) out.push_back(id);
  }
  return out;
}

std::vector<NodeId> Mission::gateways() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes_) {
    if (n.kind == NodeKind::kGateway) out.push_back(id);
  }
  return out;
}

bool Mission::finished() const {
  if (!ended_ || pending_syncs_ > 0) return false;
  for (const auto& [id, n] : nodes_) {
    if (n.status != FlightStatus::kAtBoat && n.status != FlightStatus::kDepleted) {
      return false;
    }
  }
  return true;
}

bool Mission::Active(const NodeState& n) const {
  return n.status == FlightStatus::kFlying || n.status == FlightStatus::kReturning;
}

// ---- Energy accounting ------------------------------------------------------------

void Mission::Accrue(NodeId id) {
  NodeState& n = state(id);
  Runtime& r = rt(id);
  const int64_t dt_us = (kernel_.now() - r.last_accrual).micros();
  r.last_accrual = kernel_.now();
  if (!Active(n) || dt_us <= 0) return;
  const net::RadioProfile& radio = net_.info(id).radio;
  // W x us = uJ.
  Drain(id, EnergyKind::kHover, n.hover_w * static_cast<double>(dt_us) / 1000.0);
  Drain(id, EnergyKind::kIdleRadio,
        radio.idle_on_power_mw * static_cast<double>(dt_us) / 1e6);
}

void Mission::Drain(NodeId id, EnergyKind kind, double mj) {
  NodeState& n = state(id);
  if (n.status == FlightStatus::kDepleted) return;
  const int64_t drawn = n.book.Drain(kind, ToMicrojoules(mj));
  const device::DrainResult r = n.battery.Drain(static_cast<double>(drawn) / 1000.0);
  if (n.book.remaining_uj() == 0) {
    OnDepleted(id);
    return;
  }
  if (r.crossed_low && n.status == FlightStatus::kFlying) {
    kernel_.ScheduleAfter(SimTime::Zero(), id, "fleet.low_battery", [this, id] {
      ReturnToBoat(id, ReturnReason::kLowBattery);
    });
  }
}

void Mission::SettleEnergy() {
  for (auto& [id, n] : nodes_) Accrue(id);
}

void Mission::OnDepleted(NodeId id) {
  NodeState& n = state(id);
  Runtime& r = rt(id);
  if (n.status == FlightStatus::kReturning && r.open_return) {
    return_log_[*r.open_return].depleted_en_route = true;
    r.open_return.reset();
  }
  n.status = FlightStatus::kDepleted;
  StopMoving(id);
  for (auto* ev : {&r.tick, &r.status_timer, &r.relaunch}) {
    if (*ev) kernel_.Cancel(**ev);
    ev->reset();
  }
  abandoned_verifications_ += r.verify_queue.size() + (r.verifying ? 1 : 0);
  r.verify_queue.clear();
  r.verifying.reset();
  r.board_queue.clear();
}

// ---- Movement and lifecycle ----------------------------------------------------------

void Mission::StopMoving(NodeId id) {
  Runtime& r = rt(id);
  if (r.move) kernel_.Cancel(*r.move);
  r.move.reset();
  net_.SetPosition(id, net_.PositionOf(id));
}

void Mission::MoveTo(NodeId id, Vec2 to, const std::string& tag,
                     std::function<void()> on_arrival) {
  StopMoving(id);
  const NodeState& n = state(id);
  net::Motion m{net_.PositionOf(id), to, kernel_.now(), n.speed_mps};
  const SimTime travel = m.Arrival() - kernel_.now();
  net_.SetMotion(id, m);
  rt(id).move = kernel_.ScheduleAfter(travel, id, tag, [this, id, to, f = std::move(on_arrival)] {
    rt(id).move.reset();
    net_.SetPosition(id, to);
    if (f) f();
  });
}

void Mission::StartTicks(NodeId id) {
  Runtime& r = rt(id);
  if (r.tick) kernel_.Cancel(*r.tick);
  r.tick = kernel_.ScheduleAfter(cfg_.capture_period, id, "fleet.tick",
                                 [this, id] { OnTick(id); });
}

void Mission::OnTick(NodeId id) {
  rt(id).tick.reset();
  Accrue(id);
  const NodeState& n = state(id);
  if (!Active(n)) return;
  if (n.kind == NodeKind::kSmallDrone && n.status == FlightStatus::kFlying) {
    Capture(id);
  }
  if (Active(state(id))) StartTicks(id);
}

absl::Status Mission::Start() {
  if (ledger_) SeedLedger();
  for (auto& [id, n] : nodes_) Launch(id);
  auto end = kernel_.Schedule(cfg_.mission_end, cfg_.edge, "fleet.mission_end",
                              [this] { EndMission(); });
  return end.status();
}

void Mission::Launch(NodeId id) {
  NodeState& n = state(id);
  Runtime& r = rt(id);
  r.relaunch.reset();
  if (ended_ || n.status != FlightStatus::kAtBoat) return;
  n.status = FlightStatus::kFlying;
  r.last_accrual = kernel_.now();
  StartTicks(id);
  switch (n.kind) {
    case NodeKind::kSmallDrone:
      SmallNextLeg(id);
      break;
    case NodeKind::kBigDroneLeader:
      r.status_timer = kernel_.ScheduleAfter(cfg_.status_period, id, "fleet.status",
                                             [this, id] { SendStatus(id); });
      MoveTo(id, r.home, "fleet.station", [this, id] { NextVerification(id); });
      break;
    case NodeKind::kGateway:
      MoveTo(id, r.home, "fleet.station", nullptr);
      break;
    case NodeKind::kEdgeSink:
      break;
  }
}

void Mission::SmallNextLeg(NodeId id) {
  Runtime& r = rt(id);
  if (r.next_waypoint >= r.route.size()) {
    ReturnToBoat(id, ReturnReason::kSweepDone);
    return;
  }
  MoveTo(id, r.route[r.next_waypoint], "fleet.waypoint", [this, id] {
    ++rt(id).next_waypoint;
    SmallNextLeg(id);
  });
}

void Mission::ReturnToBoat(NodeId id, ReturnReason reason) {
  NodeState& n = state(id);
  Runtime& r = rt(id);
  if (n.status != FlightStatus::kFlying) return;
  Accrue(id);
  if (n.status != FlightStatus::kFlying) return;  // depleted just now
  StopMoving(id);
  if (r.status_timer) kernel_.Cancel(*r.status_timer);
  r.status_timer.reset();
  abandoned_verifications_ += r.verify_queue.size() + (r.verifying ? 1 : 0);
  r.verify_queue.clear();
  r.verifying.reset();
  n.status = FlightStatus::kReturning;
  ReturnRecord rec;
  rec.node = id;
  rec.reason = reason;
  rec.departed = kernel_.now();
  r.open_return = return_log_.size();
  return_log_.push_back(rec);

  const double travel_s = Distance(net_.PositionOf(id), cfg_.boat) / n.speed_mps;
  const double power_w = n.hover_w + net_.info(id).radio.idle_on_power_mw / 1000;
  const double need_uj = power_w * travel_s * 1e6;
  if (static_cast<double>(n.book.remaining_uj()) < need_uj) {
    // Out of charge before the boat: keep flying until the battery is flat.
    const SimTime flat = SimTime::FromMicros(static_cast<int64_t>(
        static_cast<double>(n.book.remaining_uj()) / power_w));
    net_.SetMotion(id, {net_.PositionOf(id), cfg_.boat, kernel_.now(), n.speed_mps});
    r.move = kernel_.ScheduleAfter(flat, id, "fleet.depleted_en_route", [this, id] {
      rt(id).move.reset();
      Accrue(id);
      NodeState& m = state(id);
      if (m.status == FlightStatus::kReturning) {
        // Rounding can leave a few microjoules; the airframe is still hovering.
        Drain(id, EnergyKind::kHover, static_cast<double>(m.book.remaining_uj()) / 1000);
      }
    });
    return;
  }
  MoveTo(id, cfg_.boat, "fleet.arrive", [this, id] { OnArrival(id); });
}

void Mission::OnArrival(NodeId id) {
  Accrue(id);
  NodeState& n = state(id);
  Runtime& r = rt(id);
  if (n.status != FlightStatus::kReturning) return;
  n.status = FlightStatus::kAtBoat;
  if (r.tick) kernel_.Cancel(*r.tick);
  r.tick.reset();
  ReturnRecord& rec = return_log_[*r.open_return];
  r.open_return.reset();
  rec.arrived = kernel_.now();

  // Docking sync over the boat LAN: urgent messages first, then the bulk.
  const net::RadioProfile& lan = net_.lan_profile();
  SimTime at = kernel_.now();
  while (!r.outbox.empty()) {
    const uint64_t msg = r.outbox.front();
    r.outbox.pop_front();
    at += SimTime::FromMillis(lan.DatagramLatencyMs(cfg_.frame_bytes));
    ++pending_syncs_;
    ++rec.synced_urgent;
    kernel_.Schedule(at, cfg_.edge, "fleet.dock_sync_urgent", [this, id, msg] {
      --pending_syncs_;
      OnEdgeUrgent(id, msg, EdgeArrival::kSyncUrgent, cfg_.frame_bytes);
    }).IgnoreError();
  }
  if (n.storage.used_bytes > 0) {
    const uint64_t bytes = n.storage.used_bytes;
    const uint64_t frames = n.stored_frames;
    rec.synced_bytes = bytes;
    n.storage.used_bytes = 0;
    n.stored_frames = 0;
    at += SimTime::FromMillis(lan.DatagramLatencyMs(bytes));
    ++pending_syncs_;
    kernel_.Schedule(at, cfg_.edge, "fleet.dock_sync", [this, id, bytes, frames] {
      --pending_syncs_;
      EdgeReceipt e;
      e.at = kernel_.now();
      e.from = id;
      e.origin = id;
      e.how = EdgeArrival::kSyncBulk;
      e.bytes = bytes;
      e.frames = frames;
      edge_log_.push_back(e);
    }).IgnoreError();
  }
  n.book.Swap();
  n.battery.Reset();
  const bool more_work = n.kind != NodeKind::kSmallDrone || r.next_waypoint < r.route.size();
  if (!ended_ && more_work) {
    r.relaunch = kernel_.ScheduleAfter(cfg_.turnaround, id, "fleet.relaunch",
                                       [this, id] { Launch(id); });
  }
}

void Mission::EndMission() {
  ended_ = true;
  for (auto& [id, n] : nodes_) {
    Runtime& r = rt(id);
    if (r.relaunch) kernel_.Cancel(*r.relaunch);
    r.relaunch.reset();
    ReturnToBoat(id, ReturnReason::kMissionEnd);
  }
}

// ---- Capture and detection ------------------------------------------------------------

void Mission::Capture(NodeId id) {
  NodeState& n = state(id);
  Runtime& r = rt(id);
  const Vec2 fp = cfg_.camera.FootprintSize();
  FrameRef f;
  f.frame_id = next_frame_id_++;
  f.source = id;
  f.captured_at = kernel_.now();
  f.size_bytes = cfg_.frame_bytes;
  f.footprint = FootprintAt(net_.PositionOf(id), fp);
  for (const Victim& v : victims_) {
    if (f.footprint.Contains(v.position)) f.contains_victim = true;
  }
  ++frames_captured_;

  const ClusterLayout& cl = cfg_.clusters[n.cluster];
  const NodeState& leader = state(r.leader);
  policy::DecisionInput in;
  in.small = n.board;
  in.small_mode = n.mode;
  in.small_candidates = cl.small_candidates;
  in.big = {leader.board, leader.mode, leader.algorithm};
  in.radio = &net_.info(id).radio;
  in.link_up = net_.CanReach(id, r.leader);
  in.low_battery = n.battery.low_signaled();
  in.storage_full = !n.storage.Fits(f.size_bytes);

  FrameDecisionRecord rec;
  rec.at = kernel_.now();
  rec.node = id;
  rec.frame_id = f.frame_id;
  rec.link_up = in.link_up;
  rec.truth = f.contains_victim;
  auto d = policy::Decide(in, cfg_.policy);
  if (!d.ok()) {
    rec.action = policy::ActionKind::kDrop;
    rec.by_rule = true;
    ++dropped_frames_;
    decisions_.push_back(rec);
    return;
  }
  rec.action = d->action;
  rec.by_rule = d->by_rule;
  switch (d->action) {
    case policy::ActionKind::kOffload: {
      net::Datagram dg;
      dg.src = id;
      dg.dst = r.leader;
      dg.size_bytes = f.size_bytes;
      dg.tag = kTagFrame;
      dg.msg_id = f.frame_id;
      dg.payload = FrameMsg{f};
      auto out = net_.SendFrame(std::move(dg));
      rec.sent = out.ok() && out->delivered;
      if (!rec.sent) ++dropped_frames_;
      break;
    }
    case policy::ActionKind::kLocal:
      RunOnBoard(id, Job{DetectionStage::kFirstPass, d->local_algorithm, f});
      break;
    case policy::ActionKind::kStore:
      n.storage.used_bytes += f.size_bytes;
      ++n.stored_frames;
      break;
    case policy::ActionKind::kDrop:
      ++dropped_frames_;
      break;
  }
  decisions_.push_back(rec);
}

void Mission::RunOnBoard(NodeId id, Job job) {
  Runtime& r = rt(id);
  r.board_queue.push_back(std::move(job));
  if (r.board_busy) return;
  r.board_busy = true;
  const Job& head = r.board_queue.front();
  const NodeState& n = state(id);
  const double ms = *device::PerFrameLatencyMs(*n.board, head.algorithm, n.mode);
  kernel_.ScheduleAfter(SimTime::FromMillis(ms), id, "fleet.detect",
                        [this, id] { FinishJob(id); });
}

void Mission::FinishJob(NodeId id) {
  Runtime& r = rt(id);
  r.board_busy = false;
  NodeState& n = state(id);
  if (r.board_queue.empty() || n.status == FlightStatus::kDepleted) return;
  Job job = std::move(r.board_queue.front());
  r.board_queue.pop_front();
  const device::AlgorithmEntry entry = *n.board->Entry(job.algorithm, n.mode);
  Drain(id, EnergyKind::kProcessing,
        *device::ProcessingEnergyMj(*n.board, job.algorithm, n.mode));
  const bool verify = job.stage == DetectionStage::kVerified;
  DetectionOutcome o =
      Detect(job.frame, job.algorithm, entry, job.stage, verify ? cfg_.verify_boost : 0,
             cfg_.verify_cap, *kernel_.streams().Find("detection"));
  const Vec2 target = job.frame.footprint.center();
  detections_.push_back({kernel_.now(), id, o, target});

  if (state(id).status != FlightStatus::kDepleted) {
    if (verify) {
      OnVerified(id, job.frame, o);
    } else if (n.kind == NodeKind::kSmallDrone) {
      if (n.storage.Fits(job.frame.size_bytes)) {
        n.storage.used_bytes += job.frame.size_bytes;
        ++n.stored_frames;
      }
      net::Datagram dg;
      dg.src = id;
      dg.dst = r.leader;
      dg.size_bytes = cfg_.policy.result_datagram_bytes;
      dg.tag = kTagResult;
      dg.msg_id = job.frame.frame_id;
      dg.payload = ResultMsg{job.frame.frame_id, o.positive, target};
      (void)net_.SendDatagram(std::move(dg));
    } else {
      // Leader first pass: keep the frame for the docking sync either way.
      n.storage.used_bytes += job.frame.size_bytes;
      ++n.stored_frames;
      if (o.positive) LeaderOnDetection(id, target, job.frame.frame_id);
    }
  }
  if (!r.board_queue.empty() && state(id).status != FlightStatus::kDepleted) {
    r.board_busy = true;
    const double ms =
        *device::PerFrameLatencyMs(*n.board, r.board_queue.front().algorithm, n.mode);
    kernel_.ScheduleAfter(SimTime::FromMillis(ms), id, "fleet.detect",
                          [this, id] { FinishJob(id); });
  }
}

// ---- Leader logic ----------------------------------------------------------------

void Mission::LeaderOnDetection(NodeId leader, Vec2 target, uint64_t frame_id) {
  Runtime& r = rt(leader);
  if (state(leader).status != FlightStatus::kFlying) {
    ++abandoned_verifications_;
    return;
  }
  for (const Rect& c : r.claimed) {
    if (c.Contains(target)) {
      ++duplicate_first_pass_;
      return;
    }
  }
  // Any two frames that hold the same victim have centres less than one
  // footprint apart on each axis.
  const Vec2 fp = cfg_.camera.FootprintSize();
  r.claimed.push_back(FootprintAt(target, {2 * fp.x, 2 * fp.y}));
  r.verify_queue.push_back({target, frame_id});
  NextVerification(leader);
}

void Mission::NextVerification(NodeId leader) {
  Runtime& r = rt(leader);
  if (state(leader).status != FlightStatus::kFlying || r.verifying) return;
  const Vec2 here = net_.PositionOf(leader);
  if (r.verify_queue.empty()) {
    if (!r.move && here != r.home) MoveTo(leader, r.home, "fleet.station", nullptr);
    return;
  }
  // Nearest pending target; the earlier one on a tie.
  size_t best = 0;
  for (size_t i = 1; i < r.verify_queue.size(); ++i) {
    if (Distance(here, r.verify_queue[i].at) < Distance(here, r.verify_queue[best].at)) {
      best = i;
    }
  }
  r.verifying = r.verify_queue[best];
  r.verify_queue.erase(r.verify_queue.begin() + static_cast<long>(best));
  const Vec2 t = r.verifying->at;
  const double d = Distance(here, t);
  Vec2 stand = here;
  if (d > cfg_.verify_standoff_m) {
    const double k = cfg_.verify_standoff_m / d;
    stand = {t.x + (here.x - t.x) * k, t.y + (here.y - t.y) * k};
  }
  MoveTo(leader, stand, "fleet.verify_arrive", [this, leader] { OnVerifyArrive(leader); });
}

void Mission::OnVerifyArrive(NodeId leader) {
  Runtime& r = rt(leader);
  if (!r.verifying) return;
  FrameRef f;
  f.frame_id = next_frame_id_++;
  f.source = leader;
  f.captured_at = kernel_.now();
  f.size_bytes = cfg_.frame_bytes;
  f.footprint = FootprintAt(r.verifying->at, cfg_.camera.FootprintSize());
  for (const Victim& v : victims_) {
    if (f.footprint.Contains(v.position)) f.contains_victim = true;
  }
  ++frames_captured_;
  RunOnBoard(leader, Job{DetectionStage::kVerified, state(leader).algorithm, f});
}

void Mission::OnVerified(NodeId leader, const FrameRef& frame,
                         const DetectionOutcome& o) {
  NodeState& n = state(leader);
  Runtime& r = rt(leader);
  r.verifying.reset();
  if (o.positive) {
    UrgentRecord u;
    u.msg_id = next_msg_id_++;
    u.leader = leader;
    u.verified_at = kernel_.now();
    u.location = frame.footprint.center();
    u.urgency = kernel_.streams().Find("triage")->NextBernoulli(cfg_.urgent_fraction)
                    ? "urgent"
                    : "normal";
    for (Victim& v : victims_) {
      if (!frame.footprint.Contains(v.position)) continue;
      u.victims.push_back(v.victim_id);
      if (!v.discovered_at) v.discovered_at = kernel_.now();
    }
    urgent_index_[u.msg_id] = urgent_.size();
    urgent_.push_back(u);
    RouteUrgent(leader, u.msg_id);
  } else {
    n.storage.used_bytes += frame.size_bytes;
    ++n.stored_frames;
  }
  NextVerification(leader);
}

void Mission::RouteUrgent(NodeId leader, uint64_t msg_id) {
  UrgentRecord& u = urgent_[urgent_index_.at(msg_id)];
  if (state(leader).status != FlightStatus::kFlying) {
    u.route = RouteKind::kQueued;
    rt(leader).outbox.push_back(msg_id);
    return;
  }
  if (net_.CanReach(leader, cfg_.edge)) {
    net::Datagram dg;
    dg.src = leader;
    dg.dst = cfg_.edge;
    dg.size_bytes = cfg_.frame_bytes + cfg_.control_bytes;
    dg.tag = kTagUrgent;
    dg.msg_id = msg_id;
    dg.payload = UrgentMsgBody{msg_id, leader};
    auto out = net_.SendFrame(std::move(dg));
    if (out.ok() && out->delivered) {
      u.route = RouteKind::kDirect;
      return;
    }
    u.route = RouteKind::kQueued;
    rt(leader).outbox.push_back(msg_id);
    return;
  }
  FallbackRelay(leader, msg_id);
}

void Mission::FallbackRelay(NodeId leader, uint64_t msg_id) {
  Runtime& r = rt(leader);
  if (net_.AdjacentLeaders(leader).empty()) {
    CloseRelayWindow(leader, msg_id);
    return;
  }
  r.offers[msg_id];
  net::Datagram dg;
  dg.size_bytes = cfg_.control_bytes;
  dg.tag = kTagProbe;
  dg.msg_id = msg_id;
  dg.payload = ProbeMsg{msg_id};
  (void)net_.MulticastAdjacent(leader, std::move(dg));
  kernel_.ScheduleAfter(cfg_.relay_window, leader, "fleet.relay_window",
                        [this, leader, msg_id] { CloseRelayWindow(leader, msg_id); });
}

void Mission::CloseRelayWindow(NodeId leader, uint64_t msg_id) {
  Runtime& r = rt(leader);
  auto node = r.offers.extract(msg_id);
  std::vector<std::pair<NodeId, Vec2>> offers;
  if (node) offers = std::move(node.mapped());
  std::sort(offers.begin(), offers.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  UrgentRecord& u = urgent_[urgent_index_.at(msg_id)];
  RelayRecord rec;
  rec.at = kernel_.now();
  rec.leader = leader;
  rec.msg_id = msg_id;
  if (!offers.empty() && state(leader).status == FlightStatus::kFlying) {
    const auto& [relay, edge_pos] = offers.front();
    net::Datagram dg;
    dg.src = leader;
    dg.dst = relay;
    dg.size_bytes = cfg_.frame_bytes + cfg_.control_bytes;
    dg.tag = kTagRelayFrame;
    dg.msg_id = msg_id;
    dg.payload = UrgentMsgBody{msg_id, leader};
    auto out = net_.SendFrame(std::move(dg));
    if (out.ok() && out->delivered) {
      r.edge_position = edge_pos;
      u.route = RouteKind::kRelayed;
      u.relay = relay;
      rec.result = RelayResult::kForwarded;
      rec.relay = relay;
      rec.edge_position = edge_pos;
      relay_log_.push_back(rec);
      return;
    }
  }
  rec.result = RelayResult::kNoRelayPath;
  relay_log_.push_back(rec);
  u.route = RouteKind::kQueued;
  r.outbox.push_back(msg_id);
}

void Mission::SendStatus(NodeId leader) {
  Runtime& r = rt(leader);
  r.status_timer.reset();
  NodeState& n = state(leader);
  if (n.status != FlightStatus::kFlying) return;
  if (net_.CanReach(leader, cfg_.edge)) {
    net::Datagram dg;
    dg.src = leader;
    dg.dst = cfg_.edge;
    dg.size_bytes = cfg_.control_bytes;
    dg.tag = kTagStatus;
    dg.msg_id = ++r.status_count;
    dg.payload = StatusMsg{leader, net_.PositionOf(leader), n.battery.fraction()};
    (void)net_.SendDatagram(std::move(dg));
  }
  r.status_timer = kernel_.ScheduleAfter(cfg_.status_period, leader, "fleet.status",
                                         [this, leader] { SendStatus(leader); });
}

// ---- Datagram handling ------------------------------------------------------------

void Mission::OnDatagram(NodeId self, const net::Datagram& d) {
  NodeState& n = state(self);
  if (!Active(n)) {
    if (d.tag == kTagFrame) ++dropped_frames_;
    return;
  }
  Runtime& r = rt(self);
  if (d.tag == kTagFrame) {
    const FrameRef& f = std::any_cast<const FrameMsg&>(d.payload).frame;
    RunOnBoard(self, Job{DetectionStage::kFirstPass, n.algorithm, f});
  } else if (d.tag == kTagResult) {
    const auto& m = std::any_cast<const ResultMsg&>(d.payload);
    if (m.positive) LeaderOnDetection(self, m.target, m.frame_id);
  } else if (d.tag == kTagProbe) {
    if (n.status == FlightStatus::kFlying && net_.CanReach(self, cfg_.edge)) {
      net::Datagram reply;
      reply.src = self;
      reply.dst = d.src;
      reply.size_bytes = cfg_.control_bytes;
      reply.tag = kTagOffer;
      reply.msg_id = d.msg_id;
      reply.payload = OfferMsg{std::any_cast<const ProbeMsg&>(d.payload).msg_id,
                               net_.PositionOf(cfg_.edge)};
      (void)net_.SendDatagram(std::move(reply));
    }
  } else if (d.tag == kTagOffer) {
    const auto& m = std::any_cast<const OfferMsg&>(d.payload);
    auto it = r.offers.find(m.msg_id);
    if (it != r.offers.end()) it->second.emplace_back(d.src, m.edge_position);
  } else if (d.tag == kTagRelayFrame) {
    const auto& m = std::any_cast<const UrgentMsgBody&>(d.payload);
    bool sent = false;
    if (n.status == FlightStatus::kFlying && net_.CanReach(self, cfg_.edge)) {
      net::Datagram fwd;
      fwd.src = self;
      fwd.dst = cfg_.edge;
      fwd.size_bytes = d.size_bytes;
      fwd.tag = kTagUrgent;
      fwd.msg_id = m.msg_id;
      fwd.payload = m;
      auto out = net_.SendFrame(std::move(fwd));
      sent = out.ok() && out->delivered;
    }
    if (!sent) r.outbox.push_back(m.msg_id);
  }
}

void Mission::OnEdgeDatagram(const net::Datagram& d) {
  if (ledger_ && ledger_->OnDatagram(d)) return;
  if (d.tag == kTagUrgent) {
    const auto& m = std::any_cast<const UrgentMsgBody&>(d.payload);
    OnEdgeUrgent(d.src, m.msg_id, d.src == m.origin ? EdgeArrival::kLive
                                                    : EdgeArrival::kRelayed,
                 d.size_bytes);
  } else if (d.tag == kTagStatus) {
    const auto& m = std::any_cast<const StatusMsg&>(d.payload);
    StatusUpdateRecord rec;
    rec.at = kernel_.now();
    rec.leader = m.leader;
    if (ledger_) {
      const std::string name = state(m.leader).name;
      Json args = {{"drone_id", name},
                   {"location", {{"x", m.position.x}, {"y", m.position.y}}},
                   {"battery", m.battery},
                   {"payload_digest", absl::StrCat(name, "/status/", d.msg_id)}};
      auto seq = ledger_->Invoke(
          "DroneObject", "update_drone_info", args.dump(), std::nullopt,
          [this, name](const txflow::TxReceipt& t) {
            if (t.flag != ledger::ValidityFlag::kValid) return;
            // The coordinator pulls the fresh record with its data.
            (void)ledger_->Query("DroneObject", "query_drone",
                                 Json{{"drone_id", name}}.dump(), nullptr);
          });
      if (seq.ok()) rec.ledger_seq = *seq;
    }
    status_log_.push_back(rec);
  }
}

void Mission::OnEdgeUrgent(NodeId from, uint64_t msg_id, EdgeArrival how,
                           uint64_t bytes) {
  UrgentRecord& u = urgent_[urgent_index_.at(msg_id)];
  EdgeReceipt e;
  e.at = kernel_.now();
  e.from = from;
  e.origin = u.leader;
  e.how = how;
  e.msg_id = msg_id;
  e.bytes = bytes;
  e.frames = 1;
  e.duplicate = edge_seen_.count(msg_id) != 0;
  edge_log_.push_back(e);
  if (e.duplicate) return;
  edge_seen_[msg_id] = true;
  u.delivered_at = kernel_.now();
  for (int v : u.victims) {
    if (!victims_[v].reported_at) victims_[v].reported_at = kernel_.now();
  }
  if (!ledger_) return;
  Json args = {{"case_id", absl::StrCat("case-", msg_id)},
               {"drone_id", state(u.leader).name},
               {"location", {{"x", u.location.x}, {"y", u.location.y}}},
               {"urgency", u.urgency},
               {"reported_us", u.verified_at.micros()}};
  auto seq = ledger_->Invoke("DroneObject", "report_victim", args.dump());
  if (seq.ok()) u.ledger_seq = *seq;
}

void Mission::SeedLedger() {
  Json drones = Json::array();
  for (const auto& [id, n] : nodes_) {
    txflow::DroneRecord d;
    d.drone_id = n.name;
    d.location = cfg_.boat;
    d.cluster = n.cluster;
    if (n.kind == NodeKind::kBigDroneLeader) {
      for (const auto& [sid, s] : nodes_) {
        if (s.kind == NodeKind::kSmallDrone && s.cluster == n.cluster) {
          d.links.push_back(s.name);
        }
      }
    }
    drones.push_back(Json::parse(txflow::EncodeDrone(d)));
  }
  (void)ledger_->Invoke("DroneObject", "register_drones",
                        Json{{"drones", drones}}.dump());
  if (!cfg_.teams.empty()) {
    Json teams = Json::array();
    for (const auto& t : cfg_.teams) teams.push_back(Json::parse(txflow::EncodeTeam(t)));
    (void)ledger_->Invoke("RescueTeam", "register_teams", Json{{"teams", teams}}.dump());
  }
  if (!cfg_.hospitals.empty()) {
    Json hs = Json::array();
    for (const auto& h : cfg_.hospitals) hs.push_back(Json::parse(txflow::EncodeHospital(h)));
    (void)ledger_->Invoke("Hospital", "register_hospitals",
                          Json{{"hospitals", hs}}.dump());
  }
}

}  // namespace iod::fleet
