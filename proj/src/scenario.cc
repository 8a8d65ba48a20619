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

#include "iod/scenario/scenario.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "iod/scenario/toml.h"

namespace iod::scenario {
namespace {

using Json = nlohmann::json;

absl::Status Violation(const std::string& what) {
  return absl::InvalidArgumentError(absl::StrCat("SchemaViolation: ", what));
}

// Typed access to one TOML table. Reads mark keys as known; Finish()
// reports whatever was left over. The first problem wins.
class Fields {
 public:
  Fields(const Json& obj, std::string path, absl::Status* err)
      : obj_(obj), path_(std::move(path)), err_(err) {
    if (!obj_.is_object()) Fail(absl::StrCat("'", Where(""), "' must be a table"));
  }

  std::string Where(const std::string& key) const {
    if (path_.empty()) return key;
    if (key.empty()) return path_;
    return absl::StrCat(path_, ".", key);
  }

  const Json* Raw(const std::string& key) {
    seen_.insert(key);
    if (!obj_.is_object()) return nullptr;
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  double Number(const std::string& key, double def) {
    const Json* v = Raw(key);
    if (!v) return def;
    if (!v->is_number()) return Bad(key, "a number"), def;
    return v->get<double>();
  }

  std::optional<double> OptNumber(const std::string& key) {
    const Json* v = Raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) return Bad(key, "a number"), std::nullopt;
    return v->get<double>();
  }

  int64_t Int(const std::string& key, int64_t def) {
    const Json* v = Raw(key);
    if (!v) return def;
    if (!v->is_number_integer() ||
        (v->is_number_unsigned() && v->get<uint64_t>() > INT64_MAX)) {
      return Bad(key, "an integer"), def;
    }
    return v->get<int64_t>();
  }

  uint64_t Uint(const std::string& key, uint64_t def) {
    const Json* v = Raw(key);
    if (!v) return def;
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<int64_t>() < 0)) {
      return Bad(key, "a non-negative integer"), def;
    }
    return v->get<uint64_t>();
  }

  bool Bool(const std::string& key, bool def) {
    const Json* v = Raw(key);
    if (!v) return def;
    if (!v->is_boolean()) return Bad(key, "true or false"), def;
    return v->get<bool>();
  }

  std::string Str(const std::string& key, const std::string& def) {
    const Json* v = Raw(key);
    if (!v) return def;
    if (!v->is_string()) return Bad(key, "a string"), def;
    return v->get<std::string>();
  }

  std::vector<std::string> Strings(const std::string& key) {
    std::vector<std::string> out;
    const Json* v = Raw(key);
    if (!v) return out;
    if (!v->is_array()) return Bad(key, "an array of strings"), out;
    for (const Json& e : *v) {
      if (!e.is_string()) return Bad(key, "an array of strings"), out;
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  static std::optional<Vec2> AsPoint(const Json& v) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      return std::nullopt;
    }
    return Vec2{v[0].get<double>(), v[1].get<double>()};
  }

  std::optional<Vec2> Point(const std::string& key) {
    const Json* v = Raw(key);
    if (!v) return std::nullopt;
    auto p = AsPoint(*v);
    if (!p) Bad(key, "a point [x, y]");
    return p;
  }

  Vec2 RequiredPoint(const std::string& key) {
    if (obj_.is_object() && !obj_.contains(key)) Missing(key);
    return Point(key).value_or(Vec2{});
  }

  std::vector<Vec2> Points(const std::string& key) {
    std::vector<Vec2> out;
    const Json* v = Raw(key);
    if (!v) return out;
    if (!v->is_array()) return Bad(key, "an array of points"), out;
    for (const Json& e : *v) {
      auto p = AsPoint(e);
      if (!p) return Bad(key, "an array of points"), out;
      out.push_back(*p);
    }
    return out;
  }

  fleet::Rect RequiredRect(const std::string& key) {
    if (obj_.is_object() && !obj_.contains(key)) Missing(key);
    const Json* v = Raw(key);
    if (!v) return {};
    std::optional<Vec2> lo, hi;
    if (v->is_array() && v->size() == 2) {
      lo = AsPoint((*v)[0]);
      hi = AsPoint((*v)[1]);
    }
    if (!lo || !hi) return Bad(key, "[[x0, y0], [x1, y1]]"), fleet::Rect{};
    return {*lo, *hi};
  }

  // Array of tables; each element gets its own Fields.
  std::vector<const Json*> Tables(const std::string& key) {
    std::vector<const Json*> out;
    const Json* v = Raw(key);
    if (!v) return out;
    if (!v->is_array()) return Bad(key, "an array of tables"), out;
    for (const Json& e : *v) out.push_back(&e);
    return out;
  }

  void Missing(const std::string& key) {
    Fail(absl::StrCat("missing key '", Where(key), "'"));
  }
  void Bad(const std::string& key, const std::string& want) {
    Fail(absl::StrCat("'", Where(key), "' must be ", want));
  }
  void Fail(const std::string& what) {
    if (err_->ok()) *err_ = Violation(what);
  }

  void Finish() {
    if (!obj_.is_object()) return;
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) Fail(absl::StrCat("unknown key '", Where(k), "'"));
    }
  }

 private:
  const Json& obj_;
  std::string path_;
  absl::Status* err_;
  std::set<std::string> seen_;
};

std::string Indexed(const std::string& key, size_t i) {
  return absl::StrCat(key, "[", i, "]");
}

absl::Status FromJson(const Json& root, Scenario& s) {
  absl::Status err;
  Fields top(root, "", &err);
  s.name = top.Str("name", s.name);
  s.seed = top.Uint("seed", s.seed);
  s.duration_s = top.Number("duration_s", s.duration_s);
  s.area = top.RequiredRect("area");
  s.boat = top.RequiredPoint("boat");
  s.gateways = top.Points("gateways");

  for (size_t i = 0; const Json* t : top.Tables("cluster")) {
    Fields f(*t, Indexed("cluster", i++), &err);
    ClusterSpec c;
    c.sub_area = f.RequiredRect("sub_area");
    c.small_drones = static_cast<int>(f.Int("small_drones", c.small_drones));
    c.leader_station = f.Point("leader_station");
    c.leader_mode = f.Str("leader_mode", c.leader_mode);
    c.leader_algorithm = f.Str("leader_algorithm", c.leader_algorithm);
    c.small_mode = f.Str("small_mode", c.small_mode);
    c.small_candidates = f.Strings("small_candidates");
    f.Finish();
    s.clusters.push_back(std::move(c));
  }

  if (const Json* v = top.Raw("victims")) {
    Fields f(*v, "victims", &err);
    s.victims = f.Points("positions");
    s.random_victims = static_cast<int>(f.Int("random_count", 0));
    f.Finish();
  }

  if (const Json* v = top.Raw("links")) {
    Fields f(*v, "links", &err);
    LinkSpec& l = s.links;
    l.small_range_m = f.Number("small_range_m", l.small_range_m);
    l.leader_range_m = f.Number("leader_range_m", l.leader_range_m);
    l.small_loss = f.Number("small_loss", l.small_loss);
    l.leader_loss = f.Number("leader_loss", l.leader_loss);
    l.datagram_jitter_ms = f.Number("datagram_jitter_ms", l.datagram_jitter_ms);
    l.frame_jitter = f.Bool("frame_jitter", l.frame_jitter);
    f.Finish();
  }

  for (size_t i = 0; const Json* t : top.Tables("fault")) {
    Fields f(*t, Indexed("fault", i++), &err);
    FaultSpec x;
    x.at_s = f.Number("at_s", 0);
    x.a = f.Str("a", "");
    x.b = f.Str("b", "");
    const std::string state = f.Str("state", "down");
    if (state != "up" && state != "down") f.Bad("state", "\"up\" or \"down\"");
    x.up = state == "up";
    f.Finish();
    s.faults.push_back(std::move(x));
  }

  if (const Json* v = top.Raw("policy")) {
    Fields f(*v, "policy", &err);
    policy::PolicyConfig& p = s.policy;
    const std::string obj =
        f.Str("objective", policy::ObjectiveName(p.objective));
    if (auto o = policy::ParseObjective(obj)) {
      p.objective = *o;
    } else {
      f.Bad("objective",
            "minimize-energy, minimize-latency or lex-energy-latency");
    }
    p.min_accuracy = f.Number("min_accuracy", p.min_accuracy);
    p.max_latency_ms = f.Number("max_latency_ms", p.max_latency_ms);
    p.result_datagram_bytes = static_cast<size_t>(
        f.Int("result_datagram_bytes", static_cast<int64_t>(p.result_datagram_bytes)));
    if (const Json* rules = f.Raw("rules")) {
      p.specific_rules.clear();
      bool ok = rules->is_array();
      for (const Json& r : ok ? *rules : Json::array()) {
        if (!r.is_array() || r.size() != 2 || !r[0].is_string() || !r[1].is_string()) {
          ok = false;
          break;
        }
        auto when = policy::ParseCondition(r[0].get<std::string>());
        auto act = policy::ParseAction(r[1].get<std::string>());
        if (!when || !act) {
          ok = false;
          break;
        }
        p.specific_rules.push_back({*when, *act});
      }
      if (!ok) f.Bad("rules", "an array of [condition, action] pairs");
    }
    f.Finish();
  }

  if (const Json* v = top.Raw("mission")) {
    Fields f(*v, "mission", &err);
    MissionParams& m = s.mission;
    m.capture_period_s = f.Number("capture_period_s", m.capture_period_s);
    m.turnaround_s = f.Number("turnaround_s", m.turnaround_s);
    m.status_period_s = f.Number("status_period_s", m.status_period_s);
    m.relay_window_ms = f.Number("relay_window_ms", m.relay_window_ms);
    m.verify_boost = f.Number("verify_boost", m.verify_boost);
    m.verify_cap = f.Number("verify_cap", m.verify_cap);
    m.verify_standoff_m = f.Number("verify_standoff_m", m.verify_standoff_m);
    m.urgent_fraction = f.Number("urgent_fraction", m.urgent_fraction);
    m.frame_bytes = f.Int("frame_bytes", m.frame_bytes);
    m.control_bytes = f.Int("control_bytes", m.control_bytes);
    f.Finish();
  }

  if (const Json* v = top.Raw("profiles")) {
    Fields f(*v, "profiles", &err);
    auto node_class = [&](const char* key, NodeClassSpec& out) {
      const Json* c = f.Raw(key);
      if (!c) return;
      Fields g(*c, f.Where(key), &err);
      out.battery_capacity_mj = g.OptNumber("battery_capacity_mj");
      out.hover_power_w = g.OptNumber("hover_power_w");
      out.speed_mps = g.OptNumber("speed_mps");
      g.Finish();
    };
    node_class("small", s.small_drone);
    node_class("big", s.big_drone);
    f.Finish();
  }

  for (size_t i = 0; const Json* t : top.Tables("algorithm")) {
    Fields f(*t, Indexed("algorithm", i++), &err);
    AlgorithmSpec a;
    a.board = f.Str("board", "");
    a.algorithm = f.Str("name", "");
    a.mode = f.Str("mode", "");
    a.entry.fps = f.Number("fps", 0);
    a.entry.active_power_mw = f.Number("active_power_mw", 0);
    a.entry.accuracy = f.Number("accuracy", 0);
    a.entry.false_positive_rate =
        f.Number("false_positive_rate", a.entry.false_positive_rate);
    f.Finish();
    s.algorithms.push_back(std::move(a));
  }

  if (const Json* v = top.Raw("ledger")) {
    Fields f(*v, "ledger", &err);
    LedgerSpec& l = s.ledger;
    l.enabled = f.Bool("enabled", l.enabled);
    l.orderers = static_cast<int>(f.Int("orderers", l.orderers));
    l.peers = static_cast<int>(f.Int("peers", l.peers));
    l.threshold = static_cast<int>(f.Int("threshold", l.threshold));
    l.batch_timeout_s = f.Number("batch_timeout_s", l.batch_timeout_s);
    l.batch_max_messages = f.Int("batch_max_messages", l.batch_max_messages);
    l.batch_max_bytes = f.Int("batch_max_bytes", l.batch_max_bytes);
    l.conflict_retries = static_cast<int>(f.Int("conflict_retries", l.conflict_retries));
    l.settle_s = f.Number("settle_s", l.settle_s);
    f.Finish();
  }

  for (size_t i = 0; const Json* t : top.Tables("team")) {
    Fields f(*t, Indexed("team", i++), &err);
    txflow::RescueTeamRecord r;
    r.team_id = f.Str("id", "");
    r.location = f.RequiredPoint("location");
    r.specialists = f.Strings("specialists");
    r.available = f.Bool("available", true);
    f.Finish();
    s.teams.push_back(std::move(r));
  }

  for (size_t i = 0; const Json* t : top.Tables("hospital")) {
    Fields f(*t, Indexed("hospital", i++), &err);
    txflow::HospitalRecord h;
    h.hospital_id = f.Str("id", "");
    h.location = f.RequiredPoint("location");
    for (auto& c : f.Strings("capabilities")) h.capabilities.insert(std::move(c));
    f.Finish();
    s.hospitals.push_back(std::move(h));
  }

  top.Finish();
  return err;
}

// ---- Writing ------------------------------------------------------------------

std::string Num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string out(buf, p);
  if (out.find_first_of(".en") == std::string::npos) out += ".0";
  return out;
}

std::string Quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

std::string Point(Vec2 p) { return absl::StrCat("[", Num(p.x), ", ", Num(p.y), "]"); }

std::string RectText(const fleet::Rect& r) {
  return absl::StrCat("[", Point(r.lo), ", ", Point(r.hi), "]");
}

template <typename It, typename F>
std::string List(It begin, It end, F f) {
  std::string out = "[";
  for (It it = begin; it != end; ++it) {
    if (it != begin) out += ", ";
    out += f(*it);
  }
  return out + "]";
}

std::string Strings(const std::vector<std::string>& v) {
  return List(v.begin(), v.end(), Quote);
}

std::string Points(const std::vector<Vec2>& v) {
  return List(v.begin(), v.end(), Point);
}

// ---- Bundled scenarios ---------------------------------------------------------

constexpr char kBaselineScenario[] = R"(# One cluster of four small drones and a big-drone leader over a coastal
# strip, a relay-only gateway drone, the boat's edge server and a
# three-orderer, three-peer ledger. The leader loses its direct link to the
# edge for four minutes mid-mission.
name = "paper-baseline"
seed = 1
duration_s = 600.0
area = [[0.0, 0.0], [740.0, 1200.0]]
boat = [-400.0, 600.0]
gateways = [[0.0, 600.0]]

[[cluster]]
sub_area = [[0.0, 0.0], [740.0, 1200.0]]
small_drones = 4
leader_mode = "10W-4core"
leader_algorithm = "yolov3-tiny"
small_mode = "nominal"

[victims]
positions = [[95.0, 210.0], [260.0, 905.0], [410.0, 480.0], [530.0, 1120.0], [655.0, 330.0], [700.0, 760.0]]

[links]
small_range_m = 1000.0
leader_range_m = 1000.0
frame_jitter = true

[[fault]]
at_s = 120.0
a = "leader0"
b = "edge"
state = "down"

[[fault]]
at_s = 360.0
a = "leader0"
b = "edge"
state = "up"

[policy]
objective = "lex-energy-latency"
min_accuracy = 0.9
max_latency_ms = 500.0
rules = [["on_link_down", "store"], ["on_storage_full", "local"]]

[ledger]
orderers = 3
peers = 3
threshold = 2
conflict_retries = 5

[[team]]
id = "team-north"
location = [-350.0, 1000.0]
specialists = ["medic", "swimmer"]

[[team]]
id = "team-south"
location = [-350.0, 150.0]
specialists = ["medic", "climber"]

[[team]]
id = "team-boat"
location = [-400.0, 600.0]
specialists = ["medic"]

[[hospital]]
id = "hospital-harbour"
location = [-2500.0, 700.0]
capabilities = ["emergency_rooms", "trauma"]

[[hospital]]
id = "hospital-town"
location = [-4000.0, -500.0]
capabilities = ["emergency_rooms", "burns", "paediatrics"]
)";

}  // namespace

std::vector<std::string> NodeNames(const Scenario& s) {
  std::vector<std::string> out = {"edge"};
  for (size_t c = 0; c < s.clusters.size(); ++c) {
    out.push_back(absl::StrCat("leader", c));
    for (int k = 0; k < s.clusters[c].small_drones; ++k) {
      out.push_back(absl::StrCat("small", c, "-", k));
    }
  }
  for (size_t g = 0; g < s.gateways.size(); ++g) out.push_back(absl::StrCat("gateway", g));
  if (s.ledger.enabled) {
    for (int i = 0; i < s.ledger.orderers; ++i) out.push_back(absl::StrCat("orderer", i));
    for (int i = 0; i < s.ledger.peers; ++i) out.push_back(absl::StrCat("peer", i));
  }
  return out;
}

absl::StatusOr<device::DefaultProfiles> ResolveProfiles(const Scenario& s) {
  device::DefaultProfiles p = device::MakeDefaultProfiles();
  auto apply = [](const NodeClassSpec& o, device::NodeClass& c) {
    if (o.battery_capacity_mj) c.battery_capacity_mj = *o.battery_capacity_mj;
    if (o.hover_power_w) c.hover_power_w = *o.hover_power_w;
    if (o.speed_mps) c.speed_mps = *o.speed_mps;
  };
  apply(s.small_drone, p.small_drone);
  apply(s.big_drone, p.big_drone);
  for (size_t i = 0; i < s.algorithms.size(); ++i) {
    const AlgorithmSpec& a = s.algorithms[i];
    device::NodeClass* c = a.board == "small" ? &p.small_drone
                           : a.board == "big" ? &p.big_drone
                                              : nullptr;
    const std::string where = Indexed("algorithm", i);
    if (!c) return Violation(absl::StrCat("'", where, ".board' must be \"small\" or \"big\""));
    if (a.algorithm.empty()) return Violation(absl::StrCat("missing key '", where, ".name'"));
    if (!c->board.HasMode(a.mode)) {
      return Violation(absl::StrCat("'", where, ".mode' names unknown mode '", a.mode, "'"));
    }
    c->board.entries[{a.algorithm, a.mode}] = a.entry;
  }
  if (absl::Status st = p.small_drone.board.Validate(); !st.ok()) {
    return Violation(absl::StrCat("small board: ", st.message()));
  }
  if (absl::Status st = p.big_drone.board.Validate(); !st.ok()) {
    return Violation(absl::StrCat("big board: ", st.message()));
  }
  return p;
}

absl::Status Validate(const Scenario& s) {
  if (!(s.duration_s > 0)) return Violation("'duration_s' must be positive");
  if (!(s.area.width() > 0 && s.area.height() > 0)) {
    return Violation("'area' must have positive width and height");
  }
  if (s.clusters.empty()) return Violation("at least one [[cluster]] is required");
  auto profiles = ResolveProfiles(s);
  if (!profiles.ok()) return profiles.status();
  const device::DeviceProfile& small = profiles->small_drone.board;
  const device::DeviceProfile& big = profiles->big_drone.board;
  for (size_t i = 0; i < s.clusters.size(); ++i) {
    const ClusterSpec& c = s.clusters[i];
    const std::string w = Indexed("cluster", i);
    if (c.small_drones < 1) return Violation(absl::StrCat("'", w, ".small_drones' must be >= 1"));
    if (!(c.sub_area.width() > 0 && c.sub_area.height() > 0)) {
      return Violation(absl::StrCat("'", w, ".sub_area' must have positive size"));
    }
    if (!s.area.Contains(c.sub_area)) {
      return Violation(absl::StrCat("'", w, ".sub_area' lies outside 'area'"));
    }
    if (!big.Entry(c.leader_algorithm, c.leader_mode).ok()) {
      return Violation(absl::StrCat("'", w, "' leader profile has no entry for ",
                                    c.leader_algorithm, " in mode ", c.leader_mode));
    }
    if (!small.HasMode(c.small_mode)) {
      return Violation(absl::StrCat("'", w, ".small_mode' names unknown mode '",
                                    c.small_mode, "'"));
    }
    for (const auto& a : c.small_candidates) {
      if (!small.Entry(a, c.small_mode).ok()) {
        return Violation(absl::StrCat("'", w, ".small_candidates' names unknown algorithm '",
                                      a, "'"));
      }
    }
  }
  for (Vec2 v : s.victims) {
    if (!s.area.Contains(v)) return Violation("'victims.positions' has a point outside 'area'");
  }
  if (s.random_victims < 0) return Violation("'victims.random_count' must be >= 0");
  const LinkSpec& l = s.links;
  if (!(l.small_range_m > 0 && l.leader_range_m > 0)) {
    return Violation("link ranges must be positive");
  }
  if (l.small_loss < 0 || l.small_loss > 1 || l.leader_loss < 0 || l.leader_loss > 1) {
    return Violation("link loss must lie in [0, 1]");
  }
  if (l.datagram_jitter_ms < 0) return Violation("'links.datagram_jitter_ms' must be >= 0");
  const std::vector<std::string> names = NodeNames(s);
  const std::set<std::string> known(names.begin(), names.end());
  for (size_t i = 0; i < s.faults.size(); ++i) {
    const FaultSpec& f = s.faults[i];
    const std::string w = Indexed("fault", i);
    for (const std::string* n : {&f.a, &f.b}) {
      if (!known.count(*n)) {
        return Violation(absl::StrCat("'", w, "' names unknown node '", *n, "'"));
      }
    }
    if (f.a == f.b) return Violation(absl::StrCat("'", w, "' links a node to itself"));
    if (f.at_s < 0) return Violation(absl::StrCat("'", w, ".at_s' must be >= 0"));
  }
  const policy::PolicyConfig& p = s.policy;
  if (p.min_accuracy < 0 || p.min_accuracy > 1) {
    return Violation("'policy.min_accuracy' must lie in [0, 1]");
  }
  if (!(p.max_latency_ms > 0)) return Violation("'policy.max_latency_ms' must be positive");
  if (p.result_datagram_bytes < 1 || p.result_datagram_bytes > net::kMaxDatagramBytes) {
    return Violation("'policy.result_datagram_bytes' must fit in one datagram");
  }
  for (const auto& r : p.specific_rules) {
    if (r.action == policy::ActionKind::kOffload) {
      return Violation("'policy.rules' actions must be local, store or drop");
    }
  }
  const MissionParams& m = s.mission;
  if (!(m.capture_period_s > 0 && m.status_period_s > 0 && m.turnaround_s >= 0 &&
        m.relay_window_ms > 0 && m.verify_standoff_m >= 0)) {
    return Violation("[mission] periods must be positive");
  }
  if (m.verify_cap < 0 || m.verify_cap > 1 || m.urgent_fraction < 0 ||
      m.urgent_fraction > 1 || m.verify_boost < 0) {
    return Violation("[mission] probabilities must lie in [0, 1]");
  }
  if (m.frame_bytes < 1 || m.control_bytes < 1 ||
      m.control_bytes > static_cast<int64_t>(net::kMaxDatagramBytes)) {
    return Violation("[mission] byte sizes out of range");
  }
  const LedgerSpec& lg = s.ledger;
  if (lg.enabled) {
    if (lg.orderers < 1 || lg.peers < 1) return Violation("ledger needs >= 1 orderer and peer");
    if (lg.threshold < 1 || lg.threshold > lg.peers) {
      return Violation("'ledger.threshold' must lie in [1, peers]");
    }
    if (!(lg.batch_timeout_s > 0) || lg.batch_max_messages < 1 || lg.batch_max_bytes < 1) {
      return Violation("[ledger] batch limits must be positive");
    }
    if (lg.conflict_retries < 0 || lg.settle_s < 0) {
      return Violation("[ledger] retries and settle time must be >= 0");
    }
  }
  std::set<std::string> ids;
  for (const auto& t : s.teams) {
    if (t.team_id.empty() || !ids.insert(t.team_id).second) {
      return Violation(absl::StrCat("team id '", t.team_id, "' is empty or repeated"));
    }
  }
  ids.clear();
  for (const auto& h : s.hospitals) {
    if (h.hospital_id.empty() || !ids.insert(h.hospital_id).second) {
      return Violation(absl::StrCat("hospital id '", h.hospital_id, "' is empty or repeated"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Scenario> ParseScenario(std::string_view text) {
  auto tree = ParseToml(text);
  if (!tree.ok()) return tree.status();
  Scenario s;
  if (absl::Status st = FromJson(*tree, s); !st.ok()) return st;
  if (absl::Status st = Validate(s); !st.ok()) return st;
  return s;
}

absl::StatusOr<Scenario> LoadScenario(const std::string& path_or_name) {
  std::ifstream in(path_or_name, std::ios::binary);
  if (in) {
    std::stringstream buf;
    buf << in.rdbuf();
    return ParseScenario(buf.str());
  }
  auto bundled = BundledScenarioText(path_or_name);
  if (!bundled.ok()) {
    return absl::NotFoundError(absl::StrCat("no scenario file or bundled scenario named '",
                                            path_or_name, "'"));
  }
  return ParseScenario(*bundled);
}

std::string SaveScenario(const Scenario& s) {
  std::string o;
  absl::StrAppend(&o, "name = ", Quote(s.name), "\n");
  absl::StrAppend(&o, "seed = ", s.seed, "\n");
  absl::StrAppend(&o, "duration_s = ", Num(s.duration_s), "\n");
  absl::StrAppend(&o, "area = ", RectText(s.area), "\n");
  absl::StrAppend(&o, "boat = ", Point(s.boat), "\n");
  absl::StrAppend(&o, "gateways = ", Points(s.gateways), "\n");
  for (const ClusterSpec& c : s.clusters) {
    absl::StrAppend(&o, "\n[[cluster]]\n");
    absl::StrAppend(&o, "sub_area = ", RectText(c.sub_area), "\n");
    absl::StrAppend(&o, "small_drones = ", c.small_drones, "\n");
    if (c.leader_station) {
      absl::StrAppend(&o, "leader_station = ", Point(*c.leader_station), "\n");
    }
    absl::StrAppend(&o, "leader_mode = ", Quote(c.leader_mode), "\n");
    absl::StrAppend(&o, "leader_algorithm = ", Quote(c.leader_algorithm), "\n");
    absl::StrAppend(&o, "small_mode = ", Quote(c.small_mode), "\n");
    absl::StrAppend(&o, "small_candidates = ", Strings(c.small_candidates), "\n");
  }
  absl::StrAppend(&o, "\n[victims]\npositions = ", Points(s.victims), "\n");
  absl::StrAppend(&o, "random_count = ", s.random_victims, "\n");
  const LinkSpec& l = s.links;
  absl::StrAppend(&o, "\n[links]\n");
  absl::StrAppend(&o, "small_range_m = ", Num(l.small_range_m), "\n");
  absl::StrAppend(&o, "leader_range_m = ", Num(l.leader_range_m), "\n");
  absl::StrAppend(&o, "small_loss = ", Num(l.small_loss), "\n");
  absl::StrAppend(&o, "leader_loss = ", Num(l.leader_loss), "\n");
  absl::StrAppend(&o, "datagram_jitter_ms = ", Num(l.datagram_jitter_ms), "\n");
  absl::StrAppend(&o, "frame_jitter = ", l.frame_jitter ? "true" : "false", "\n");
  for (const FaultSpec& f : s.faults) {
    absl::StrAppend(&o, "\n[[fault]]\nat_s = ", Num(f.at_s), "\n");
    absl::StrAppend(&o, "a = ", Quote(f.a), "\nb = ", Quote(f.b), "\n");
    absl::StrAppend(&o, "state = ", f.up ? "\"up\"" : "\"down\"", "\n");
  }
  const policy::PolicyConfig& p = s.policy;
  absl::StrAppend(&o, "\n[policy]\n");
  absl::StrAppend(&o, "objective = ", Quote(policy::ObjectiveName(p.objective)), "\n");
  absl::StrAppend(&o, "min_accuracy = ", Num(p.min_accuracy), "\n");
  absl::StrAppend(&o, "max_latency_ms = ", Num(p.max_latency_ms), "\n");
  absl::StrAppend(&o, "result_datagram_bytes = ", p.result_datagram_bytes, "\n");
  absl::StrAppend(&o, "rules = ",
                  List(p.specific_rules.begin(), p.specific_rules.end(),
                       [](const policy::SpecificRule& r) {
                         return absl::StrCat("[", Quote(policy::ConditionName(r.when)),
                                             ", ", Quote(policy::ActionName(r.action)), "]");
                       }),
                  "\n");
  const MissionParams& m = s.mission;
  absl::StrAppend(&o, "\n[mission]\n");
  absl::StrAppend(&o, "capture_period_s = ", Num(m.capture_period_s), "\n");
  absl::StrAppend(&o, "turnaround_s = ", Num(m.turnaround_s), "\n");
  absl::StrAppend(&o, "status_period_s = ", Num(m.status_period_s), "\n");
  absl::StrAppend(&o, "relay_window_ms = ", Num(m.relay_window_ms), "\n");
  absl::StrAppend(&o, "verify_boost = ", Num(m.verify_boost), "\n");
  absl::StrAppend(&o, "verify_cap = ", Num(m.verify_cap), "\n");
  absl::StrAppend(&o, "verify_standoff_m = ", Num(m.verify_standoff_m), "\n");
  absl::StrAppend(&o, "urgent_fraction = ", Num(m.urgent_fraction), "\n");
  absl::StrAppend(&o, "frame_bytes = ", m.frame_bytes, "\n");
  absl::StrAppend(&o, "control_bytes = ", m.control_bytes, "\n");
  auto node_class = [&o](const char* name, const NodeClassSpec& c) {
    if (!c.battery_capacity_mj && !c.hover_power_w && !c.speed_mps) return;
    absl::StrAppend(&o, "\n[profiles.", name, "]\n");
    if (c.battery_capacity_mj) {
      absl::StrAppend(&o, "battery_capacity_mj = ", Num(*c.battery_capacity_mj), "\n");
    }
    if (c.hover_power_w) absl::StrAppend(&o, "hover_power_w = ", Num(*c.hover_power_w), "\n");
    if (c.speed_mps) absl::StrAppend(&o, "speed_mps = ", Num(*c.speed_mps), "\n");
  };
  node_class("small", s.small_drone);
  node_class("big", s.big_drone);
  for (const AlgorithmSpec& a : s.algorithms) {
    absl::StrAppend(&o, "\n[[algorithm]]\nboard = ", Quote(a.board), "\n");
    absl::StrAppend(&o, "name = ", Quote(a.algorithm), "\nmode = ", Quote(a.mode), "\n");
    absl::StrAppend(&o, "fps = ", Num(a.entry.fps), "\n");
    absl::StrAppend(&o, "active_power_mw = ", Num(a.entry.active_power_mw), "\n");
    absl::StrAppend(&o, "accuracy = ", Num(a.entry.accuracy), "\n");
    absl::StrAppend(&o, "false_positive_rate = ", Num(a.entry.false_positive_rate), "\n");
  }
  const LedgerSpec& lg = s.ledger;
  absl::StrAppend(&o, "\n[ledger]\n");
  absl::StrAppend(&o, "enabled = ", lg.enabled ? "true" : "false", "\n");
  absl::StrAppend(&o, "orderers = ", lg.orderers, "\npeers = ", lg.peers, "\n");
  absl::StrAppend(&o, "threshold = ", lg.threshold, "\n");
  absl::StrAppend(&o, "batch_timeout_s = ", Num(lg.batch_timeout_s), "\n");
  absl::StrAppend(&o, "batch_max_messages = ", lg.batch_max_messages, "\n");
  absl::StrAppend(&o, "batch_max_bytes = ", lg.batch_max_bytes, "\n");
  absl::StrAppend(&o, "conflict_retries = ", lg.conflict_retries, "\n");
  absl::StrAppend(&o, "settle_s = ", Num(lg.settle_s), "\n");
  for (const auto& t : s.teams) {
    absl::StrAppend(&o, "\n[[team]]\nid = ", Quote(t.team_id), "\n");
    absl::StrAppend(&o, "location = ", Point(t.location), "\n");
    absl::StrAppend(&o, "specialists = ", Strings(t.specialists), "\n");
    absl::StrAppend(&o, "available = ", t.available ? "true" : "false", "\n");
  }
  for (const auto& h : s.hospitals) {
    absl::StrAppend(&o, "\n[[hospital]]\nid = ", Quote(h.hospital_id), "\n");
    absl::StrAppend(&o, "location = ", Point(h.location), "\n");
    std::vector<std::string> caps(h.capabilities.begin(), h.capabilities.end());
    absl::StrAppend(&o, "capabilities = ", Strings(caps), "\n");
  }
  return o;
}

std::vector<std::string> BundledScenarioNames() { return {"paper-baseline"}; }

absl::StatusOr<std::string> BundledScenarioText(std::string_view name) {
  if (name == "paper-baseline") return std::string(kBaselineScenario);
  return absl::NotFoundError(absl::StrCat("no bundled scenario '", std::string(name), "'"));
}

absl::StatusOr<fleet::MissionConfig> ToMissionConfig(const Scenario& s,
                                                     RandomStream& rng) {
  if (absl::Status st = Validate(s); !st.ok()) return st;
  auto profiles = ResolveProfiles(s);
  if (!profiles.ok()) return profiles.status();
  fleet::MissionConfig cfg;
  cfg.profiles = *std::move(profiles);
  cfg.small_radio = net::DefaultWifiProfile(s.links.small_range_m);
  cfg.small_radio.loss_probability = s.links.small_loss;
  cfg.small_radio.datagram_jitter_ms = s.links.datagram_jitter_ms;
  cfg.leader_radio = net::DefaultWifiProfile(s.links.leader_range_m);
  cfg.leader_radio.loss_probability = s.links.leader_loss;
  cfg.leader_radio.datagram_jitter_ms = s.links.datagram_jitter_ms;
  for (const ClusterSpec& c : s.clusters) {
    fleet::ClusterLayout l;
    l.sub_area = c.sub_area;
    l.small_drones = c.small_drones;
    l.leader_station = c.leader_station;
    l.leader_mode = c.leader_mode;
    l.leader_algorithm = c.leader_algorithm;
    l.small_mode = c.small_mode;
    l.small_candidates = c.small_candidates;
    cfg.clusters.push_back(std::move(l));
  }
  cfg.gateways = s.gateways;
  cfg.boat = s.boat;
  cfg.victims = s.victims;
  for (int i = 0; i < s.random_victims; ++i) {
    const double x = rng.NextUniformIn(s.area.lo.x, s.area.hi.x);
    const double y = rng.NextUniformIn(s.area.lo.y, s.area.hi.y);
    cfg.victims.push_back({x, y});
  }
  cfg.policy = s.policy;
  const MissionParams& m = s.mission;
  cfg.frame_bytes = static_cast<uint64_t>(m.frame_bytes);
  cfg.control_bytes = static_cast<size_t>(m.control_bytes);
  cfg.capture_period = SimTime::FromSeconds(m.capture_period_s);
  cfg.mission_end = SimTime::FromSeconds(s.duration_s);
  cfg.turnaround = SimTime::FromSeconds(m.turnaround_s);
  cfg.status_period = SimTime::FromSeconds(m.status_period_s);
  cfg.relay_window = SimTime::FromMillis(m.relay_window_ms);
  cfg.verify_boost = m.verify_boost;
  cfg.verify_cap = m.verify_cap;
  cfg.verify_standoff_m = m.verify_standoff_m;
  cfg.urgent_fraction = m.urgent_fraction;
  cfg.teams = s.teams;
  cfg.hospitals = s.hospitals;
  return cfg;
}

}  // namespace iod::scenario
