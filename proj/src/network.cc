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

#include "iod/net/network.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace iod::net {

const char* RoleName(NodeRole r) {
  switch (r) {
    case NodeRole::kSmallDrone: return "small-drone";
    case NodeRole::kLeader: return "leader";
    case NodeRole::kGateway: return "gateway";
    case NodeRole::kEdgeSink: return "edge-sink";
    case NodeRole::kOrderer: return "orderer";
    case NodeRole::kPeer: return "peer";
  }
  return "?";
}

const char* LinkKindName(LinkKind k) {
  switch (k) {
    case LinkKind::kSmallToLeader: return "small-leader";
    case LinkKind::kLeaderToLeader: return "leader-leader";
    case LinkKind::kLeaderToEdge: return "leader-edge";
    case LinkKind::kEdgeToEdge: return "edge-edge";
  }
  return "?";
}

const char* DropReasonName(DropReason r) {
  switch (r) {
    case DropReason::kNone: return "none";
    case DropReason::kNoLink: return "no-link";
    case DropReason::kLinkDown: return "link-down";
    case DropReason::kOutOfRange: return "out-of-range";
    case DropReason::kLoss: return "loss";
  }
  return "?";
}

bool IsLeaderRole(NodeRole r) {
  return r == NodeRole::kLeader || r == NodeRole::kGateway;
}

bool IsEdgeRole(NodeRole r) {
  return r == NodeRole::kEdgeSink || r == NodeRole::kOrderer ||
         r == NodeRole::kPeer;
}

absl::Status RadioProfile::Validate() const {
  if (!(range_m > 0)) return absl::InvalidArgumentError("radio range must be > 0");
  if (datagram_slope_ms_per_byte < 0 || datagram_intercept_ms < 0) {
    return absl::InvalidArgumentError("datagram latency line must be >= 0");
  }
  if (!(frame.min_ms <= frame.decision_ms && frame.decision_ms <= frame.max_ms)) {
    return absl::InvalidArgumentError("frame latency needs min <= decision <= max");
  }
  if (!(tx_power_mw > 0) || !(idle_on_power_mw > 0)) {
    return absl::InvalidArgumentError("radio powers must be > 0");
  }
  if (loss_probability < 0 || loss_probability > 1 || datagram_jitter_ms < 0) {
    return absl::InvalidArgumentError("loss/jitter out of range");
  }
  return absl::OkStatus();
}

double RadioProfile::DatagramLatencyMs(size_t bytes) const {
  return datagram_intercept_ms +
         datagram_slope_ms_per_byte * static_cast<double>(bytes);
}

RadioProfile DefaultWifiProfile(double range_m) {
  RadioProfile p;
  p.range_m = range_m;
  p.datagram_slope_ms_per_byte =
      (kTableMaxMs - kTableSmallMs) /
      static_cast<double>(kMaxDatagramBytes - kTableSmallBytes);
  p.datagram_intercept_ms =
      kTableSmallMs - p.datagram_slope_ms_per_byte * kTableSmallBytes;
  // 650 mJ over 200 ms and 975 mJ over 300 ms both give 3250 mW.
  p.tx_power_mw = 3250;
  p.idle_on_power_mw = 450;
  return p;
}

RadioProfile EdgeLanProfile() {
  RadioProfile p;
  p.range_m = 1e6;
  p.datagram_intercept_ms = 0.25;
  p.datagram_slope_ms_per_byte = 8.0 / 1e7;  // 10 Gb/s
  p.frame = {0, 0, 0};
  p.tx_power_mw = 1;
  p.idle_on_power_mw = 1;
  return p;
}

Vec2 Motion::At(SimTime t) const {
  if (t <= depart) return from;
  const double d = Distance(from, to);
  if (d == 0 || speed_mps <= 0) return to;
  const double travelled = (t - depart).seconds() * speed_mps;
  if (travelled >= d) return to;
  const double f = travelled / d;
  return {from.x + (to.x - from.x) * f, from.y + (to.y - from.y) * f};
}

SimTime Motion::Arrival() const {
  if (speed_mps <= 0) return depart;
  return depart + SimTime::FromSeconds(Distance(from, to) / speed_mps);
}

Network::Network(Kernel& kernel) : kernel_(kernel), lan_(EdgeLanProfile()) {
  kernel_.streams().Register("link-jitter");
  kernel_.streams().Register("link-loss");
}

Network::Key Network::KeyOf(NodeId a, NodeId b) {
  return a.value < b.value ? Key{a.value, b.value} : Key{b.value, a.value};
}

absl::Status Network::Attach(NodeId id, NodeInfo info, Vec2 position,
                             Receiver receiver) {
  if (nodes_.count(id)) {
    return absl::AlreadyExistsError(absl::StrCat("node ", id.value, " attached twice"));
  }
  if (auto s = info.radio.Validate(); !s.ok()) return s;
  nodes_[id] = Node{std::move(info), position, std::nullopt, std::move(receiver)};
  return absl::OkStatus();
}

std::optional<NodeId> Network::FindByName(const std::string& name) const {
  for (const auto& [id, n] : nodes_) {
    if (n.info.name == name) return id;
  }
  return std::nullopt;
}

std::vector<NodeId> Network::Nodes() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes_) out.push_back(id);
  return out;
}

void Network::SetReceiver(NodeId id, Receiver receiver) {
  nodes_.at(id).receiver = std::move(receiver);
}

void Network::SetPosition(NodeId id, Vec2 p) {
  Node& n = nodes_.at(id);
  n.position = p;
  n.motion.reset();
}

void Network::SetMotion(NodeId id, const Motion& m) {
  Node& n = nodes_.at(id);
  n.motion = m;
  n.position = m.to;
}

Vec2 Network::PositionOf(NodeId id) const {
  const Node& n = nodes_.at(id);
  if (n.motion) return n.motion->At(kernel_.now());
  return n.position;
}

absl::Status Network::AddLink(NodeId a, NodeId b, LinkKind kind) {
  if (!attached(a) || !attached(b)) {
    return absl::FailedPreconditionError("Unattached: link endpoint missing");
  }
  if (a == b) return absl::InvalidArgumentError("self link");
  const NodeInfo& ia = nodes_.at(a).info;
  const NodeInfo& ib = nodes_.at(b).info;
  auto either = [&](auto pa, auto pb) {
    return (pa(ia.role) && pb(ib.role)) || (pa(ib.role) && pb(ia.role));
  };
  bool ok = false;
  switch (kind) {
    case LinkKind::kSmallToLeader:
      ok = either([](NodeRole r) { return r == NodeRole::kSmallDrone; },
                  [](NodeRole r) { return r == NodeRole::kLeader; }) &&
           ia.cluster == ib.cluster && ia.cluster >= 0;
      break;
    case LinkKind::kLeaderToLeader:
      ok = IsLeaderRole(ia.role) && IsLeaderRole(ib.role);
      break;
    case LinkKind::kLeaderToEdge:
      ok = either(IsLeaderRole, IsEdgeRole);
      break;
    case LinkKind::kEdgeToEdge:
      ok = IsEdgeRole(ia.role) && IsEdgeRole(ib.role);
      break;
  }
  if (!ok) {
    return absl::InvalidArgumentError(absl::StrCat(
        "link kind ", LinkKindName(kind), " not allowed between ", ia.name,
        " (", RoleName(ia.role), ") and ", ib.name, " (", RoleName(ib.role), ")"));
  }
  links_[KeyOf(a, b)] = Link{kind};
  return absl::OkStatus();
}

bool Network::HasLink(NodeId a, NodeId b) const {
  return links_.count(KeyOf(a, b)) != 0;
}

absl::StatusOr<LinkKind> Network::KindOf(NodeId a, NodeId b) const {
  auto it = links_.find(KeyOf(a, b));
  if (it == links_.end()) return absl::NotFoundError("UnknownLink");
  return it->second.kind;
}

absl::Status Network::SetLinkState(NodeId a, NodeId b, LinkState s) {
  auto it = links_.find(KeyOf(a, b));
  if (it == links_.end()) {
    return absl::NotFoundError(
        absl::StrCat("UnknownLink: ", a.value, "-", b.value));
  }
  it->second.state = s;
  return absl::OkStatus();
}

absl::StatusOr<LinkState> Network::StateOf(NodeId a, NodeId b) const {
  auto it = links_.find(KeyOf(a, b));
  if (it == links_.end()) return absl::NotFoundError("UnknownLink");
  return it->second.state;
}

absl::Status Network::ScheduleLinkState(SimTime at, NodeId a, NodeId b,
                                        LinkState s) {
  if (!HasLink(a, b)) {
    return absl::NotFoundError(
        absl::StrCat("UnknownLink: ", a.value, "-", b.value));
  }
  auto ev = kernel_.Schedule(
      at, a, s == LinkState::kUp ? "link-up" : "link-down",
      [this, a, b, s] { (void)SetLinkState(a, b, s); });
  return ev.status();
}

void Network::SetLossProbability(NodeId a, NodeId b, double p) {
  auto it = links_.find(KeyOf(a, b));
  if (it != links_.end()) it->second.loss_probability = p;
}

absl::StatusOr<bool> Network::InRange(NodeId a, NodeId b) const {
  if (!attached(a) || !attached(b)) {
    return absl::FailedPreconditionError("Unattached");
  }
  const double range = std::min(nodes_.at(a).info.radio.range_m,
                                nodes_.at(b).info.radio.range_m);
  return Distance(PositionOf(a), PositionOf(b)) <= range;
}

bool Network::CanReach(NodeId a, NodeId b) const {
  auto it = links_.find(KeyOf(a, b));
  if (it == links_.end() || it->second.state != LinkState::kUp) return false;
  auto r = InRange(a, b);
  return r.ok() && *r;
}

double Network::LatencyFor(const Link& link, const Node& src, const Node& dst,
                           SendKind kind, size_t bytes) {
  const RadioProfile* model = &src.info.radio;
  if (link.kind == LinkKind::kEdgeToEdge) {
    model = &lan_;
  } else if (IsEdgeRole(src.info.role)) {
    model = &dst.info.radio;  // the drone side defines the air link
  }
  if (kind == SendKind::kFrame) {
    if (!frame_jitter_) return model->frame.decision_ms;
    return kernel_.streams().Register("link-jitter").NextUniformIn(
        model->frame.min_ms, model->frame.max_ms);
  }
  double ms = model->DatagramLatencyMs(bytes);
  if (model->datagram_jitter_ms > 0) {
    ms += kernel_.streams().Register("link-jitter").NextUniformIn(
        0, model->datagram_jitter_ms);
  }
  return ms;
}

absl::StatusOr<DeliveryOutcome> Network::Send(Datagram d, SendKind kind) {
  auto src_it = nodes_.find(d.src);
  auto dst_it = nodes_.find(d.dst);
  if (src_it == nodes_.end() || dst_it == nodes_.end()) {
    return absl::FailedPreconditionError(
        absl::StrCat("Unattached: ", d.src.value, "->", d.dst.value));
  }
  if (d.size_bytes == 0) {
    return absl::InvalidArgumentError("payload must be at least one byte");
  }
  if (kind == SendKind::kDatagram && d.size_bytes > kMaxDatagramBytes) {
    return absl::InvalidArgumentError(
        absl::StrCat("OversizePayload: ", d.size_bytes, " > ", kMaxDatagramBytes));
  }
  DeliveryOutcome out;
  out.peer = d.dst;
  SendRecord rec;
  rec.at = kernel_.now();
  rec.src = d.src;
  rec.dst = d.dst;
  rec.tag = d.tag;
  rec.bytes = d.size_bytes;
  rec.kind = kind;

  auto link_it = links_.find(KeyOf(d.src, d.dst));
  if (link_it == links_.end()) {
    out.reason = DropReason::kNoLink;
  } else if (link_it->second.state != LinkState::kUp) {
    out.reason = DropReason::kLinkDown;
  } else if (!*InRange(d.src, d.dst)) {
    out.reason = DropReason::kOutOfRange;
  }
  if (out.reason != DropReason::kNone) {
    rec.reason = out.reason;
    sends_.push_back(std::move(rec));
    return out;
  }

  const Link& link = link_it->second;
  const Node& src = src_it->second;
  out.latency_ms = LatencyFor(link, src, dst_it->second, kind, d.size_bytes);
  const double tx_power = link.kind == LinkKind::kEdgeToEdge
                              ? lan_.tx_power_mw
                              : src.info.radio.tx_power_mw;
  out.tx_energy_mj = tx_power * out.latency_ms / 1000.0;
  tx_energy_[d.src] += out.tx_energy_mj;
  if (tx_hook_) tx_hook_(d.src, out.tx_energy_mj);
  rec.transmitted = true;
  rec.latency_ms = out.latency_ms;
  rec.tx_energy_mj = out.tx_energy_mj;

  const double loss = std::max(link.loss_probability, src.info.radio.loss_probability);
  if (loss > 0 &&
      kernel_.streams().Register("link-loss").NextBernoulli(loss)) {
    out.reason = DropReason::kLoss;
    rec.reason = out.reason;
    sends_.push_back(std::move(rec));
    return out;
  }

  SimTime at = kernel_.now() + SimTime::FromMillis(out.latency_ms);
  auto& last = last_delivery_[{d.src.value, d.dst.value}];
  if (at < last) at = last;
  last = at;
  out.delivered = true;
  out.deliver_at = at;
  rec.delivered = true;
  rec.deliver_at = at;
  sends_.push_back(std::move(rec));

  const NodeId dst = d.dst;
  kernel_.Schedule(at, dst, "deliver:" + d.tag,
                   [this, dg = std::move(d)]() mutable {
                     deliveries_.push_back(
                         {kernel_.now(), dg.src, dg.dst, dg.tag});
                     auto it = nodes_.find(dg.dst);
                     if (it != nodes_.end() && it->second.receiver) {
                       it->second.receiver(dg);
                     }
                   })
      .IgnoreError();
  return out;
}

absl::StatusOr<DeliveryOutcome> Network::SendDatagram(Datagram d) {
  return Send(std::move(d), SendKind::kDatagram);
}

absl::StatusOr<DeliveryOutcome> Network::SendFrame(Datagram d) {
  return Send(std::move(d), SendKind::kFrame);
}

absl::StatusOr<DeliveryOutcome> Network::SendBulk(Datagram d) {
  return Send(std::move(d), SendKind::kBulk);
}

std::vector<NodeId> Network::AdjacentLeaders(NodeId leader) const {
  std::vector<NodeId> out;
  for (const auto& [key, link] : links_) {
    if (link.kind != LinkKind::kLeaderToLeader) continue;
    if (key.first == leader.value) out.push_back(NodeId{key.second});
    if (key.second == leader.value) out.push_back(NodeId{key.first});
  }
  std::sort(out.begin(), out.end());
  return out;
}

absl::StatusOr<std::vector<DeliveryOutcome>> Network::MulticastAdjacent(
    NodeId leader, Datagram d) {
  auto it = nodes_.find(leader);
  if (it == nodes_.end()) return absl::FailedPreconditionError("Unattached");
  if (!IsLeaderRole(it->second.info.role)) {
    return absl::FailedPreconditionError(
        absl::StrCat("NotALeader: ", it->second.info.name));
  }
  std::vector<DeliveryOutcome> outs;
  for (NodeId n : AdjacentLeaders(leader)) {
    Datagram copy = d;
    copy.src = leader;
    copy.dst = n;
    auto r = SendDatagram(std::move(copy));
    if (!r.ok()) return r.status();
    outs.push_back(*r);
  }
  return outs;
}

double Network::tx_energy_mj(NodeId id) const {
  auto it = tx_energy_.find(id);
  return it == tx_energy_.end() ? 0.0 : it->second;
}

}  // namespace iod::net
