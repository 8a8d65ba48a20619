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

#include "iod/scenario/report.h"

#include <algorithm>
#include <charconv>
#include <set>
#include <tuple>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "iod/fleet/sweep.h"
#include "iod/net/network.h"
#include "iod/policy/offload.h"

namespace iod::scenario {
namespace {

using Json = nlohmann::json;

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits one CSV record starting at `pos`; quoted fields may hold commas,
// doubled quotes and newlines.
bool NextRecord(std::string_view in, size_t& pos, std::vector<std::string>& out) {
  out.clear();
  if (pos >= in.size()) return false;
  std::string field;
  bool quoted = false;
  while (pos < in.size()) {
    const char c = in[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < in.size() && in[pos] == '"') {
          field += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return true;
}

template <typename T>
bool ParseInt(const std::string& s, T& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

Json Latency(const LatencyStat& l) {
  return {{"count", l.count}, {"sum_us", l.sum_us}, {"max_us", l.max_us},
          {"mean_ms", l.mean_ms()}};
}

Json Opt(const std::optional<int64_t>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

void LatencyStat::Add(int64_t us) {
  ++count;
  sum_us += us;
  max_us = std::max(max_us, us);
}

std::string EventsToCsv(const std::vector<TraceEvent>& events) {
  std::string out = absl::StrCat(kEventsCsvHeader, "\n");
  for (const TraceEvent& e : events) {
    absl::StrAppend(&out, e.t_us, ",", CsvField(e.kind), ",", CsvField(e.node), ",",
                    e.id, ",", CsvField(e.label), ",", CsvField(e.detail), ",", e.v1,
                    ",", e.v2, ",", e.v3, "\n");
  }
  return out;
}

absl::StatusOr<std::vector<TraceEvent>> EventsFromCsv(std::string_view csv) {
  std::vector<TraceEvent> out;
  size_t pos = 0;
  std::vector<std::string> f;
  if (!NextRecord(csv, pos, f) || absl::StrJoin(f, ",") != kEventsCsvHeader) {
    return absl::InvalidArgumentError("events csv: missing header");
  }
  int line = 1;
  while (NextRecord(csv, pos, f)) {
    ++line;
    if (f.size() == 1 && f[0].empty()) continue;
    TraceEvent e;
    if (f.size() != 9 || !ParseInt(f[0], e.t_us) || !ParseInt(f[3], e.id) ||
        !ParseInt(f[6], e.v1) || !ParseInt(f[7], e.v2) || !ParseInt(f[8], e.v3)) {
      return absl::InvalidArgumentError(absl::StrCat("events csv: bad row at line ", line));
    }
    e.kind = f[1];
    e.node = f[2];
    e.label = f[4];
    e.detail = f[5];
    out.push_back(std::move(e));
  }
  return out;
}

MetricsReport Aggregate(const std::vector<TraceEvent>& events) {
  MetricsReport r;
  std::map<std::string, size_t> energy_index;
  std::map<std::pair<bool, std::string>, RequestClass> requests;
  std::map<std::string, SendClass> sends;
  for (const TraceEvent& e : events) {
    const std::string& k = e.kind;
    if (k == "run") {
      r.scenario = e.node;
      r.seed = e.id;
      r.kernel_digest = e.detail;
      r.end_us = e.v1;
      r.kernel_events = e.v2;
    } else if (k == "decision") {
      ++r.decisions[e.label];
      r.frames_sent += e.v1;
    } else if (k == "detection") {
      ++r.detections[absl::StrCat(e.label, e.v1 ? "/pos" : "/neg")];
      if (e.v1 && !e.v2) ++r.false_positives;
    } else if (k == "urgent") {
      ++r.urgent;
      ++r.urgent_routes[e.label];
      if (e.v1 >= 0) {
        ++r.urgent_delivered;
        r.urgent_latency.Add(e.v1 - e.t_us);
      }
    } else if (k == "edge_rx") {
      if (e.v3) {
        ++r.edge_duplicates;
      } else {
        r.edge_bytes[e.label] += e.v1;
        ++r.edge_messages[e.label];
      }
    } else if (k == "relay") {
      ++r.relays[e.label];
    } else if (k == "return") {
      ++r.returns[e.label];
      r.depleted_en_route += e.v2;
    } else if (k == "victim") {
      VictimMetrics v;
      v.victim = static_cast<int>(e.id);
      if (e.v1 >= 0) v.discovered_us = e.v1;
      if (e.v2 >= 0) v.reported_us = e.v2;
      r.victims.push_back(v);
    } else if (k == "energy") {
      auto [it, fresh] = energy_index.try_emplace(e.node, r.energy.size());
      if (fresh) r.energy.push_back({.node = e.node});
      EnergyMetrics& m = r.energy[it->second];
      if (e.label == "drop") {
        m.drop_uj = e.v1;
        m.sorties = e.v2;
      } else {
        m.by_kind_uj[e.label] = e.v1;
      }
    } else if (k == "invoke" || k == "query") {
      const bool query = k == "query";
      RequestClass& c = requests[{query, e.label}];
      c.function = e.label;
      c.query = query;
      ++c.count;
      c.payload_bytes += e.v2;
      if (e.v1 >= 0) {
        ++c.completed;
        c.latency.Add(e.v1 - e.t_us);
        if (!query) {
          r.commit_latency.Add(e.v1 - e.t_us);
          ++r.validity[e.detail];
        }
      }
    } else if (k == "block") {
      ++r.blocks;
      r.chain_txs += e.v1;
    } else if (k == "raft") {
      ++r.raft[e.label];
      r.raft_max_term = std::max(r.raft_max_term, e.v1);
    } else if (k == "send") {
      SendClass& c = sends[e.label];
      c.tag = e.label;
      ++c.count;
      c.bytes += e.v1;
      c.tx_energy_uj += e.v3;
      if (e.v2 >= 0) {
        ++c.delivered;
        c.latency.Add(e.v2);
      }
    }
  }
  for (auto& [key, c] : requests) r.requests.push_back(std::move(c));
  for (auto& [tag, c] : sends) r.sends.push_back(std::move(c));
  return r;
}

Json MetricsReport::ToJson() const {
  Json j;
  j["scenario"] = scenario;
  j["seed"] = seed;
  j["end_us"] = end_us;
  j["kernel_events"] = kernel_events;
  j["kernel_digest"] = kernel_digest;
  Json vs = Json::array();
  for (const VictimMetrics& v : victims) {
    Json o = {{"victim", v.victim},
              {"discovered_us", Opt(v.discovered_us)},
              {"reported_us", Opt(v.reported_us)}};
    o["report_latency_us"] = v.discovered_us && v.reported_us
                                 ? Json(*v.reported_us - *v.discovered_us)
                                 : Json(nullptr);
    vs.push_back(std::move(o));
  }
  j["victims"] = std::move(vs);
  Json en = Json::array();
  for (const EnergyMetrics& e : energy) {
    en.push_back({{"node", e.node},
                  {"by_kind_uj", e.by_kind_uj},
                  {"drop_uj", e.drop_uj},
                  {"sorties", e.sorties}});
  }
  j["energy"] = std::move(en);
  j["decisions"] = decisions;
  j["frames_sent"] = frames_sent;
  j["detections"] = detections;
  j["false_positives"] = false_positives;
  j["urgent"] = {{"total", urgent},
                 {"delivered", urgent_delivered},
                 {"routes", urgent_routes},
                 {"latency", Latency(urgent_latency)}};
  j["edge"] = {{"bytes", edge_bytes},
               {"messages", edge_messages},
               {"duplicates", edge_duplicates}};
  j["relays"] = relays;
  j["returns"] = returns;
  j["depleted_en_route"] = depleted_en_route;
  Json classes = Json::array();
  for (const RequestClass& c : requests) {
    classes.push_back({{"function", c.function},
                       {"kind", c.query ? "query" : "invoke"},
                       {"count", c.count},
                       {"completed", c.completed},
                       {"latency", Latency(c.latency)},
                       {"payload_bytes", c.payload_bytes}});
  }
  j["ledger"] = {{"blocks", blocks},
                 {"txs", chain_txs},
                 {"validity", validity},
                 {"commit_latency", Latency(commit_latency)},
                 {"requests", std::move(classes)}};
  j["raft"] = {{"events", raft}, {"max_term", raft_max_term}};
  Json ss = Json::array();
  for (const SendClass& c : sends) {
    ss.push_back({{"tag", c.tag},
                  {"count", c.count},
                  {"delivered", c.delivered},
                  {"bytes", c.bytes},
                  {"latency", Latency(c.latency)},
                  {"tx_energy_uj", c.tx_energy_uj}});
  }
  j["sends"] = std::move(ss);
  return j;
}

absl::StatusOr<Json> ModelTables(const Scenario& s) {
  auto profiles = ResolveProfiles(s);
  if (!profiles.ok()) return profiles.status();
  const device::DeviceProfile& small = profiles->small_drone.board;
  const device::DeviceProfile& big = profiles->big_drone.board;
  const net::RadioProfile radio = net::DefaultWifiProfile(s.links.small_range_m);

  // Costs of every detector regardless of the accuracy and latency floors;
  // "eligible" says whether the policy would consider it.
  policy::PolicyConfig open = s.policy;
  open.min_accuracy = 0;
  open.max_latency_ms = 1e18;
  open.specific_rules.clear();
  Json offload = Json::array();
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const ClusterSpec& c : s.clusters) {
    if (!seen.insert({c.small_mode, c.leader_algorithm, c.leader_mode}).second) continue;
    for (const auto& algo : small.AlgorithmsFor(c.small_mode)) {
      policy::DecisionInput in;
      in.small = &small;
      in.small_mode = c.small_mode;
      in.small_candidates = {algo};
      in.big = {&big, c.leader_mode, c.leader_algorithm};
      in.radio = &radio;
      auto d = policy::Decide(in, open);
      if (!d.ok()) return d.status();
      const device::AlgorithmEntry e = *small.Entry(algo, c.small_mode);
      const double processing = *device::ProcessingEnergyMj(small, algo, c.small_mode);
      const bool eligible =
          e.accuracy >= s.policy.min_accuracy &&
          d->predicted.local_latency_ms <= s.policy.max_latency_ms;
      offload.push_back({{"algorithm", algo},
                         {"small_mode", c.small_mode},
                         {"leader", absl::StrCat(c.leader_algorithm, "@", c.leader_mode)},
                         {"accuracy", e.accuracy},
                         {"local_ms", d->predicted.local_latency_ms},
                         {"processing_mj", processing},
                         {"local_mj", d->predicted.local_energy_mj},
                         {"offload_ms", d->predicted.offload_latency_ms},
                         {"offload_mj", d->predicted.offload_energy_mj},
                         {"cheaper", policy::ActionName(d->action)},
                         {"eligible", eligible}});
    }
  }
  Json link = Json::array();
  for (size_t bytes : {size_t{1000}, net::kTableSmallBytes, size_t{32768},
                       net::kMaxDatagramBytes}) {
    link.push_back({{"bytes", bytes}, {"latency_ms", radio.DatagramLatencyMs(bytes)}});
  }
  Json coverage = Json::array();
  const fleet::CameraModel camera;
  const double small_power_w =
      profiles->small_drone.hover_power_w + radio.idle_on_power_mw / 1000;
  const double endurance_s = profiles->small_drone.battery_capacity_mj / 1000 / small_power_w;
  for (size_t i = 0; i < s.clusters.size(); ++i) {
    const ClusterSpec& c = s.clusters[i];
    auto plan = fleet::PlanSweep(c.sub_area, c.small_drones, camera.FootprintSize(),
                                 profiles->small_drone.speed_mps, endurance_s);
    if (!plan.ok()) return plan.status();
    coverage.push_back({{"cluster", i},
                        {"sweep_seconds", plan->sweep_seconds},
                        {"endurance_s", endurance_s},
                        {"coverage_fraction", plan->coverage_fraction},
                        {"area_too_large", plan->area_too_large}});
  }
  return Json{{"offload", std::move(offload)},
              {"link", {{"rows", std::move(link)},
                        {"frame_min_ms", radio.frame.min_ms},
                        {"frame_max_ms", radio.frame.max_ms},
                        {"frame_decision_ms", radio.frame.decision_ms}}},
              {"coverage", std::move(coverage)}};
}

absl::StatusOr<std::string> RenderTables(const Json& report,
                                         const std::vector<std::string>& which) {
  if (!report.contains("metrics") || !report.contains("model")) {
    return absl::InvalidArgumentError("report lacks 'metrics' or 'model'");
  }
  const Json& m = report["metrics"];
  const Json& model = report["model"];
  std::string out;
  for (const std::string& t : which) {
    if (t == "offload") {
      absl::StrAppend(&out, "Offload comparison (per frame)\n");
      absl::StrAppend(&out, absl::StrFormat("%-14s %-9s %8s %10s %10s %10s %10s %8s\n",
                                            "algorithm", "mode", "accuracy", "local ms",
                                            "local mJ", "offload ms", "offload mJ",
                                            "cheaper"));
      for (const Json& r : model["offload"]) {
        absl::StrAppend(
            &out, absl::StrFormat("%-14s %-9s %8.2f %10.1f %10.1f %10.1f %10.1f %8s\n",
                                  r["algorithm"].get<std::string>(),
                                  r["small_mode"].get<std::string>(),
                                  r["accuracy"].get<double>(), r["local_ms"].get<double>(),
                                  r["local_mj"].get<double>(), r["offload_ms"].get<double>(),
                                  r["offload_mj"].get<double>(),
                                  r["cheaper"].get<std::string>()));
      }
      for (const Json& c : m["sends"]) {
        if (c["tag"] != "fleet.frame") continue;
        absl::StrAppend(&out, absl::StrFormat(
                                  "observed: %d frames offloaded, mean air time %.1f ms, "
                                  "%.1f mJ each\n",
                                  c["delivered"].get<int64_t>(),
                                  c["latency"]["mean_ms"].get<double>(),
                                  c["count"].get<int64_t>()
                                      ? c["tx_energy_uj"].get<int64_t>() / 1000.0 /
                                            c["count"].get<int64_t>()
                                      : 0.0));
      }
      absl::StrAppend(&out, "\n");
    } else if (t == "link") {
      absl::StrAppend(&out, "Datagram latency (model)\n");
      absl::StrAppend(&out, absl::StrFormat("%10s %12s\n", "bytes", "latency ms"));
      for (const Json& r : model["link"]["rows"]) {
        absl::StrAppend(&out, absl::StrFormat("%10d %12.3f\n", r["bytes"].get<int64_t>(),
                                              r["latency_ms"].get<double>()));
      }
      absl::StrAppend(&out, absl::StrFormat(
                                "frames: %.0f-%.0f ms, planned at %.0f ms\n",
                                model["link"]["frame_min_ms"].get<double>(),
                                model["link"]["frame_max_ms"].get<double>(),
                                model["link"]["frame_decision_ms"].get<double>()));
      absl::StrAppend(&out, "Observed traffic\n");
      absl::StrAppend(&out, absl::StrFormat("%-26s %8s %9s %14s %12s\n", "tag", "sent",
                                            "delivered", "bytes", "mean ms"));
      for (const Json& c : m["sends"]) {
        absl::StrAppend(&out, absl::StrFormat("%-26s %8d %9d %14d %12.3f\n",
                                              c["tag"].get<std::string>(),
                                              c["count"].get<int64_t>(),
                                              c["delivered"].get<int64_t>(),
                                              c["bytes"].get<int64_t>(),
                                              c["latency"]["mean_ms"].get<double>()));
      }
      absl::StrAppend(&out, "\n");
    } else if (t == "ledger") {
      absl::StrAppend(&out, "Ledger request classes\n");
      absl::StrAppend(&out, absl::StrFormat("%-20s %-7s %6s %9s %12s %12s\n", "function",
                                            "kind", "count", "completed", "mean e2e ms",
                                            "payload MB"));
      for (const Json& c : m["ledger"]["requests"]) {
        const int64_t n = c["count"].get<int64_t>();
        absl::StrAppend(
            &out, absl::StrFormat("%-20s %-7s %6d %9d %12.1f %12.2f\n",
                                  c["function"].get<std::string>(),
                                  c["kind"].get<std::string>(), n,
                                  c["completed"].get<int64_t>(),
                                  c["latency"]["mean_ms"].get<double>(),
                                  n ? c["payload_bytes"].get<int64_t>() / 1048576.0 / n
                                    : 0.0));
      }
      absl::StrAppend(&out, absl::StrFormat("blocks %d, transactions %d\n\n",
                                            m["ledger"]["blocks"].get<int64_t>(),
                                            m["ledger"]["txs"].get<int64_t>()));
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown table '", t, "' (offload, link, ledger)"));
    }
  }
  return out;
}

std::string FlattenCsv(const Json& doc) {
  std::string out = "key,value\n";
  const Json flat = doc.flatten();
  for (const auto& [path, v] : flat.items()) {
    absl::StrAppend(&out, CsvField(path), ",",
                    CsvField(v.is_string() ? v.get<std::string>() : v.dump()), "\n");
  }
  return out;
}

}  // namespace iod::scenario
