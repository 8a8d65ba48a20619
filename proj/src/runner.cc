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

#include "iod/scenario/runner.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "iod/ledger/chain.h"

namespace iod::scenario {
namespace {

using Json = nlohmann::json;

const char* SendKindName(net::SendKind k) {
  switch (k) {
    case net::SendKind::kDatagram: return "datagram";
    case net::SendKind::kFrame: return "frame";
    case net::SendKind::kBulk: return "bulk";
  }
  return "?";
}

const char* RelayName(fleet::RelayResult r) {
  return r == fleet::RelayResult::kForwarded ? "forwarded" : "no-relay-path";
}

int64_t OrMinus(const std::optional<SimTime>& t) { return t ? t->micros() : -1; }

std::string Hex64(uint64_t v) {
  static const char* kDigits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = kDigits[v & 0xf];
  return out;
}

}  // namespace

absl::StatusOr<std::unique_ptr<Simulation>> Simulation::Build(const Scenario& s,
                                                              const RunOptions& opts) {
  if (absl::Status st = Validate(s); !st.ok()) return st;
  std::unique_ptr<Simulation> sim(new Simulation());
  sim->scenario_ = s;
  sim->opts_ = opts;
  sim->seed_ = opts.seed.value_or(s.seed);
  sim->scenario_.seed = sim->seed_;
  sim->kernel_ = std::make_unique<Kernel>(sim->seed_);
  sim->kernel_->set_keep_trace(true);
  sim->net_ = std::make_unique<net::Network>(*sim->kernel_);
  sim->net_->set_frame_jitter(s.links.frame_jitter);

  RandomStream& victims = sim->kernel_->streams().Register("scenario.victims");
  auto cfg = ToMissionConfig(s, victims);
  if (!cfg.ok()) return cfg.status();
  const uint32_t fleet_first = cfg->first_node_id;
  auto mission = fleet::Mission::Create(*sim->net_, *std::move(cfg));
  if (!mission.ok()) return mission.status();
  sim->mission_ = *std::move(mission);

  if (s.ledger.enabled) {
    txflow::LedgerLayout layout;
    layout.orderers = s.ledger.orderers;
    layout.peers = s.ledger.peers;
    layout.threshold = static_cast<uint32_t>(s.ledger.threshold);
    layout.orderer.batch.timeout = SimTime::FromSeconds(s.ledger.batch_timeout_s);
    layout.orderer.batch.max_messages = static_cast<uint32_t>(s.ledger.batch_max_messages);
    layout.orderer.batch.max_bytes = static_cast<uint64_t>(s.ledger.batch_max_bytes);
    layout.gateway.conflict_retries = s.ledger.conflict_retries;
    layout.key_seed = sim->seed_;
    layout.first_node_id = std::max<uint32_t>(
        layout.first_node_id,
        fleet_first + static_cast<uint32_t>(sim->mission_->nodes().size()) + 10);
    layout.clients = {{sim->mission_->config().edge, "edge"}};
    auto d = txflow::LedgerDeployment::Build(*sim->net_, layout, &sim->raft_trace_);
    if (!d.ok()) return d.status();
    sim->ledger_ = *std::move(d);
    sim->ledger_->Start();
    sim->mission_->AttachLedger(sim->ledger_->gateways()[0].get());
  }

  for (size_t i = 0; i < s.faults.size(); ++i) {
    const FaultSpec& f = s.faults[i];
    const auto a = sim->net_->FindByName(f.a);
    const auto b = sim->net_->FindByName(f.b);
    const std::string where =
        absl::StrCat("fault[", i, "] ", f.a, "-", f.b, " at ", f.at_s, " s");
    if (!a || !b) return absl::InvalidArgumentError(absl::StrCat(where, ": unknown node"));
    absl::Status st = sim->net_->ScheduleLinkState(
        SimTime::FromSeconds(f.at_s), *a, *b,
        f.up ? net::LinkState::kUp : net::LinkState::kDown);
    if (!st.ok()) {
      return absl::Status(st.code(), absl::StrCat(where, ": ", st.message()));
    }
  }
  if (absl::Status st = sim->mission_->Start(); !st.ok()) return st;
  return sim;
}

const txflow::Gateway* Simulation::edge_gateway() const {
  return ledger_ ? ledger_->gateways()[0].get() : nullptr;
}

bool Simulation::LedgerSettled() const {
  if (!ledger_) return true;
  for (const auto& r : edge_gateway()->receipts()) {
    if (!r.finished()) return false;
  }
  for (const auto& q : edge_gateway()->queries()) {
    if (!q.answered_at && q.error.empty()) return false;
  }
  const uint64_t h = ledger_->peers()[0]->ledger().height();
  for (const auto& p : ledger_->peers()) {
    if (p->ledger().height() != h) return false;
  }
  return true;
}

std::vector<ledger::Block> Simulation::Chain() const {
  if (!ledger_) return {};
  return ledger_->peers()[0]->ledger().blocks();
}

std::string Simulation::NameOf(NodeId id) const {
  return net_->attached(id) ? net_->info(id).name : absl::StrCat("n", id.value);
}

absl::Status Simulation::Run() {
  const SimTime cap = SimTime::FromSeconds(
      opts_.until_s.value_or(scenario_.duration_s + 4 * 3600.0));
  const SimTime settle = SimTime::FromSeconds(scenario_.ledger.settle_s);
  const SimTime step = SimTime::FromSeconds(1);
  while (kernel_->now() < cap) {
    const SimTime next = std::min(kernel_->now() + step, cap);
    auto ran = kernel_->RunUntil(next);
    if (!ran.ok()) {
      return absl::Status(ran.status().code(),
                          absl::StrCat("at ", kernel_->now().micros(), " us: ",
                                       ran.status().message()));
    }
    if (!fleet_home_at_ && mission_->finished()) fleet_home_at_ = kernel_->now();
    if (fleet_home_at_ &&
        (LedgerSettled() || kernel_->now() >= *fleet_home_at_ + settle)) {
      break;
    }
  }
  mission_->SettleEnergy();
  return absl::OkStatus();
}

std::vector<TraceEvent> CollectEvents(const Simulation& sim) {
  std::vector<TraceEvent> ev;
  const fleet::Mission& m = sim.mission();
  const int64_t end = sim.kernel().now().micros();
  auto name = [&](NodeId id) { return sim.NameOf(id); };

  ev.push_back({.t_us = 0,
                .kind = "run",
                .node = sim.scenario().name,
                .id = sim.seed(),
                .detail = Hex64(sim.kernel().trace_digest()),
                .v1 = end,
                .v2 = static_cast<int64_t>(sim.kernel().processed())});
  for (const auto& d : m.decisions()) {
    ev.push_back({.t_us = d.at.micros(),
                  .kind = "decision",
                  .node = name(d.node),
                  .id = d.frame_id,
                  .label = policy::ActionName(d.action),
                  .v1 = d.sent,
                  .v2 = d.by_rule});
  }
  for (const auto& d : m.detections()) {
    ev.push_back({.t_us = d.at.micros(),
                  .kind = "detection",
                  .node = name(d.node),
                  .id = d.outcome.frame_id,
                  .label = fleet::StageName(d.outcome.stage),
                  .detail = d.outcome.algorithm,
                  .v1 = d.outcome.positive,
                  .v2 = d.outcome.truth});
  }
  for (const auto& u : m.urgent()) {
    ev.push_back({.t_us = u.verified_at.micros(),
                  .kind = "urgent",
                  .node = name(u.leader),
                  .id = u.msg_id,
                  .label = fleet::RouteName(u.route),
                  .detail = u.relay ? name(*u.relay) : "",
                  .v1 = OrMinus(u.delivered_at),
                  .v2 = u.ledger_seq ? static_cast<int64_t>(*u.ledger_seq) : -1});
  }
  for (const auto& e : m.edge_receipts()) {
    ev.push_back({.t_us = e.at.micros(),
                  .kind = "edge_rx",
                  .node = name(e.origin),
                  .id = e.msg_id,
                  .label = fleet::ArrivalName(e.how),
                  .detail = name(e.from),
                  .v1 = static_cast<int64_t>(e.bytes),
                  .v2 = static_cast<int64_t>(e.frames),
                  .v3 = e.duplicate});
  }
  for (const auto& r : m.relays()) {
    ev.push_back({.t_us = r.at.micros(),
                  .kind = "relay",
                  .node = name(r.leader),
                  .id = r.msg_id,
                  .label = RelayName(r.result),
                  .detail = r.relay ? name(*r.relay) : ""});
  }
  for (const auto& r : m.returns()) {
    ev.push_back({.t_us = r.departed.micros(),
                  .kind = "return",
                  .node = name(r.node),
                  .label = fleet::ReturnReasonName(r.reason),
                  .v1 = OrMinus(r.arrived),
                  .v2 = r.depleted_en_route,
                  .v3 = static_cast<int64_t>(r.synced_bytes)});
  }
  if (const txflow::Gateway* gw = sim.edge_gateway()) {
    for (const auto& r : gw->receipts()) {
      std::string detail = "pending";
      if (r.flag) {
        detail = std::string(ledger::ValidityFlagName(*r.flag));
      } else if (!r.error.empty()) {
        detail = r.error;
      }
      ev.push_back({.t_us = r.proposed_at.micros(),
                    .kind = "invoke",
                    .node = name(gw->node()),
                    .id = r.seq,
                    .label = r.function,
                    .detail = detail,
                    .v1 = OrMinus(r.committed_at),
                    .v2 = static_cast<int64_t>(r.attachment_bytes),
                    .v3 = static_cast<int64_t>(r.block)});
    }
    for (const auto& q : gw->queries()) {
      ev.push_back({.t_us = q.issued_at.micros(),
                    .kind = "query",
                    .node = name(gw->node()),
                    .id = q.seq,
                    .label = q.function,
                    .detail = q.error,
                    .v1 = OrMinus(q.answered_at),
                    .v2 = static_cast<int64_t>(q.reply_bytes)});
    }
  }
  for (const auto& r : sim.raft_trace().records()) {
    std::string detail;
    switch (r.kind) {
      case ordering::RaftTraceRecord::kRole:
        detail = std::string(ordering::RaftRoleName(r.role));
        break;
      case ordering::RaftTraceRecord::kVote:
        detail = r.vote_for;
        break;
      case ordering::RaftTraceRecord::kApply:
      case ordering::RaftTraceRecord::kCut:
        detail = r.entry;
        break;
      default:
        break;
    }
    ev.push_back({.t_us = r.at.micros(),
                  .kind = "raft",
                  .node = r.node,
                  .id = r.tx_count,
                  .label = ordering::RaftTraceKindName(r.kind),
                  .detail = std::move(detail),
                  .v1 = static_cast<int64_t>(r.term),
                  .v2 = static_cast<int64_t>(r.index),
                  .v3 = static_cast<int64_t>(r.block_number)});
  }
  for (const auto& s : sim.net().sends()) {
    std::string detail = SendKindName(s.kind);
    if (!s.delivered) {
      detail = s.transmitted ? "lost" : net::DropReasonName(s.reason);
    }
    ev.push_back({.t_us = s.at.micros(),
                  .kind = "send",
                  .node = name(s.src),
                  .id = s.dst.value,
                  .label = s.tag,
                  .detail = std::move(detail),
                  .v1 = static_cast<int64_t>(s.bytes),
                  .v2 = s.delivered ? (s.deliver_at - s.at).micros() : -1,
                  .v3 = fleet::ToMicrojoules(s.tx_energy_mj)});
  }
  // Summary rows.
  for (const auto& b : sim.Chain()) {
    ev.push_back({.t_us = end,
                  .kind = "block",
                  .node = "chain",
                  .id = b.header.number,
                  .detail = ledger::ToHex(b.header_hash),
                  .v1 = static_cast<int64_t>(b.txs.size())});
  }
  for (const auto& v : m.victims()) {
    ev.push_back({.t_us = end,
                  .kind = "victim",
                  .node = absl::StrCat("victim", v.victim_id),
                  .id = static_cast<uint64_t>(v.victim_id),
                  .detail = absl::StrCat(v.position.x, ";", v.position.y),
                  .v1 = OrMinus(v.discovered_at),
                  .v2 = OrMinus(v.reported_at)});
  }
  for (const auto& [id, n] : m.nodes()) {
    for (int k = 0; k < fleet::kEnergyKinds; ++k) {
      const auto kind = static_cast<fleet::EnergyKind>(k);
      ev.push_back({.t_us = end,
                    .kind = "energy",
                    .node = n.name,
                    .label = fleet::EnergyKindName(kind),
                    .v1 = n.book.by_kind(kind)});
    }
    ev.push_back({.t_us = end,
                  .kind = "energy",
                  .node = n.name,
                  .label = "drop",
                  .v1 = n.book.total_drop(),
                  .v2 = n.book.sorties()});
  }
  std::stable_sort(ev.begin(), ev.end(), [](const TraceEvent& a, const TraceEvent& b) {
    return a.t_us < b.t_us;
  });
  return ev;
}

bool InvariantReport::ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const InvariantResult& r) { return r.ok; });
}

Json InvariantReport::ToJson() const {
  Json out = Json::array();
  for (const auto& c : checks) {
    out.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
  }
  return out;
}

InvariantReport CheckInvariants(const Simulation& sim) {
  InvariantReport rep;
  const fleet::Mission& m = sim.mission();
  auto add = [&rep](std::string name, bool ok, std::string detail = "") {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  const bool home = sim.fleet_home_at().has_value();
  const std::string skipped = "skipped: fleet not home";

  {
    std::string bad;
    for (const auto& [id, n] : m.nodes()) {
      if (!n.book.balanced()) {
        bad = absl::StrCat(n.name, " drop ", n.book.total_drop(), " uJ vs causes ",
                           n.book.total_by_kind(), " uJ");
        break;
      }
    }
    add("energy_books_balance", bad.empty(), bad);
  }

  if (!home) {
    add("urgent_reaches_edge", true, skipped);
  } else {
    std::string bad;
    for (const auto& u : m.urgent()) {
      const bool lost = m.node(u.leader).status == fleet::FlightStatus::kDepleted;
      if (!u.delivered_at && !lost) {
        bad = absl::StrCat("message ", u.msg_id, " from ", sim.NameOf(u.leader),
                           " never reached the edge");
        break;
      }
    }
    add("urgent_reaches_edge", bad.empty(), bad);
  }

  {
    std::map<uint64_t, int> arrivals;
    for (const auto& e : m.edge_receipts()) {
      if (e.how != fleet::EdgeArrival::kSyncBulk) ++arrivals[e.msg_id];
    }
    std::string bad;
    for (const auto& [msg, n] : arrivals) {
      if (n > 1) {
        bad = absl::StrCat("message ", msg, " reached the edge ", n, " times");
        break;
      }
    }
    add("no_duplicate_urgent", bad.empty(), bad);
  }

  {
    std::string bad;
    for (const auto& e : m.edge_receipts()) {
      if (e.how != fleet::EdgeArrival::kSyncBulk) continue;
      bool after_landing = false;
      for (const auto& r : m.returns()) {
        if (r.node == e.from && r.arrived && *r.arrived <= e.at) after_landing = true;
      }
      if (!after_landing) {
        bad = absl::StrCat("bulk sync from ", sim.NameOf(e.from), " at ", e.at.micros(),
                           " us before it landed");
        break;
      }
    }
    const NodeId edge = m.config().edge;
    for (const auto& s : sim.net().sends()) {
      if (!bad.empty()) break;
      if (s.dst == edge && s.delivered && (s.tag == "fleet.frame" || s.tag == "fleet.result")) {
        bad = absl::StrCat("frame data sent live to the edge by ", sim.NameOf(s.src));
      }
    }
    add("stored_frames_only_by_sync", bad.empty(), bad);
  }

  {
    std::string bad;
    for (const auto& v : m.victims()) {
      if (v.reported_at && (!v.discovered_at || *v.reported_at < *v.discovered_at)) {
        bad = absl::StrCat("victim ", v.victim_id, " reported before discovery");
        break;
      }
    }
    add("victim_report_after_discovery", bad.empty(), bad);
  }

  const txflow::LedgerDeployment* lg = sim.ledger();
  if (!lg) return rep;
  const txflow::Gateway* gw = sim.edge_gateway();

  if (!home || !sim.LedgerSettled()) {
    add("urgent_committed_on_ledger", true, "skipped: ledger not settled");
  } else {
    std::string bad;
    for (const auto& u : m.urgent()) {
      if (!u.delivered_at) continue;
      if (!u.ledger_seq) {
        bad = absl::StrCat("message ", u.msg_id, " has no ledger invoke");
        break;
      }
      const txflow::TxReceipt* r = &gw->receipts()[*u.ledger_seq];
      while (r->retried_as) r = &gw->receipts()[*r->retried_as];
      if (!r->flag || *r->flag != ledger::ValidityFlag::kValid) {
        bad = absl::StrCat("message ", u.msg_id, " ended as ",
                           r->flag ? std::string(ledger::ValidityFlagName(*r->flag))
                                   : r->error);
        break;
      }
    }
    add("urgent_committed_on_ledger", bad.empty(), bad);
  }

  {
    std::string bad;
    for (const auto& p : lg->peers()) {
      const ledger::VerifyReport v = ledger::VerifyChain(p->ledger().blocks());
      if (!v.ok) {
        bad = absl::StrCat(sim.NameOf(p->node()), " block ", v.bad_block, ": ",
                           std::string(ledger::BadBlockReasonName(v.reason)), " ",
                           v.detail);
        break;
      }
    }
    add("chain_verifies", bad.empty(), bad);
  }

  {
    std::string bad;
    const auto& first = lg->peers()[0]->ledger().blocks();
    for (const auto& p : lg->peers()) {
      const auto& blocks = p->ledger().blocks();
      const size_t n = std::min(first.size(), blocks.size());
      for (size_t i = 0; i < n && bad.empty(); ++i) {
        if (!(blocks[i] == first[i])) {
          bad = absl::StrCat(sim.NameOf(p->node()), " differs at block ", i);
        }
      }
      if (bad.empty() && home && sim.LedgerSettled() && blocks.size() != first.size()) {
        bad = absl::StrCat(sim.NameOf(p->node()), " has ", blocks.size(), " blocks, not ",
                           first.size());
      }
    }
    add("peers_agree", bad.empty(), bad);
  }

  {
    const auto safety = ordering::CheckElectionSafety(sim.raft_trace());
    add("raft_election_safety", safety.ok, safety.violation);
    const auto applied = ordering::CheckAppliedAgreement(sim.raft_trace());
    add("raft_applied_agreement", applied.ok, applied.violation);
    std::vector<const ordering::RaftNode*> nodes;
    for (const auto& o : lg->orderers()) nodes.push_back(&o->raft());
    const auto matching = ordering::CheckLogMatching(nodes);
    add("raft_log_matching", matching.ok, matching.violation);
  }
  return rep;
}

absl::StatusOr<RunArtifacts> MakeArtifacts(const Simulation& sim) {
  RunArtifacts a;
  const std::vector<TraceEvent> events = CollectEvents(sim);
  a.events_csv = EventsToCsv(events);
  a.metrics = Aggregate(events);
  a.invariants = CheckInvariants(sim);
  auto model = ModelTables(sim.scenario());
  if (!model.ok()) return model.status();
  Json report = {{"metrics", a.metrics.ToJson()},
                 {"model", *std::move(model)},
                 {"invariants", a.invariants.ToJson()},
                 {"invariants_ok", a.invariants.ok()}};
  a.report_json = report.dump(2) + "\n";
  a.report_csv = FlattenCsv(report);
  a.kernel_trace_csv = "seq,t_us,target,tag\n";
  for (const TraceRecord& r : sim.kernel().trace()) {
    absl::StrAppend(&a.kernel_trace_csv, r.seq, ",", r.fire_at.micros(), ",",
                    r.target.value, ",", r.tag, "\n");
  }
  a.raft_jsonl = sim.raft_trace().ToJsonl();
  const std::vector<ledger::Block> chain = sim.Chain();
  a.ledger_export = ledger::ExportChain(chain);
  a.ledger_index_json = ledger::ExportIndexJson(chain);
  a.scenario_toml = SaveScenario(sim.scenario());
  return a;
}

absl::Status WriteArtifacts(const RunArtifacts& a, const std::string& dir,
                            const std::string& format) {
  if (format != "json" && format != "csv") {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown report format '", format, "' (json or csv)"));
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::InternalError(absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  std::vector<std::pair<std::string, const std::string*>> files = {
      {"report.json", &a.report_json},
      {"events.csv", &a.events_csv},
      {"kernel_trace.csv", &a.kernel_trace_csv},
      {"raft.jsonl", &a.raft_jsonl},
      {"ledger.bin", &a.ledger_export},
      {"ledger.bin.index.json", &a.ledger_index_json},
      {"scenario.toml", &a.scenario_toml},
  };
  if (format == "csv") files.push_back({"report.csv", &a.report_csv});
  for (const auto& [file, bytes] : files) {
    const std::string path = (std::filesystem::path(dir) / file).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes->data(), static_cast<std::streamsize>(bytes->size()));
    if (!out) return absl::InternalError(absl::StrCat("cannot write ", path));
  }
  return absl::OkStatus();
}

}  // namespace iod::scenario
