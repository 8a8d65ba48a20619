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

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "gtest/gtest.h"
#include "iod/scenario/report.h"
#include "iod/scenario/runner.h"
#include "iod/scenario/scenario.h"
#include "iod/scenario/toml.h"
#include "json.hpp"

namespace iod::scenario {
namespace {

constexpr char kMinimal[] = R"(
area = [[0, 0], [400, 400]]
boat = [-100, 200]

[[cluster]]
sub_area = [[0, 0], [400, 400]]
)";

RunArtifacts MustRun(const Scenario& s, RunOptions opts = {}) {
  auto sim = Simulation::Build(s, opts);
  EXPECT_TRUE(sim.ok()) << sim.status();
  EXPECT_TRUE((*sim)->Run().ok());
  auto a = MakeArtifacts(**sim);
  EXPECT_TRUE(a.ok()) << a.status();
  return *std::move(a);
}

Scenario Baseline() {
  auto s = LoadScenario("paper-baseline");
  EXPECT_TRUE(s.ok()) << s.status();
  return *s;
}

TEST(TomlTest, TablesArraysAndInlineTables) {
  auto doc = ParseToml(R"(
a = 1
b.c = "x\ty"  # comment
[t]
list = [1, 2.5,
        true]
inline = { k = "v", n = -3 }
[[arr]]
x = 1
[[arr]]
x = 2
)");
  ASSERT_TRUE(doc.ok()) << doc.status();
  EXPECT_EQ((*doc)["a"], 1);
  EXPECT_EQ((*doc)["b"]["c"], "x\ty");
  EXPECT_EQ((*doc)["t"]["list"].size(), 3u);
  EXPECT_EQ((*doc)["t"]["list"][1], 2.5);
  EXPECT_EQ((*doc)["t"]["inline"]["n"], -3);
  ASSERT_EQ((*doc)["arr"].size(), 2u);
  EXPECT_EQ((*doc)["arr"][1]["x"], 2);
}

TEST(TomlTest, ErrorsCarryTheLine) {
  auto dup = ParseToml("a = 1\n\na = 2\n");
  ASSERT_FALSE(dup.ok());
  EXPECT_EQ(ParseErrorLine(dup.status()), 3);
  auto open = ParseToml("x = [1, 2\n");
  EXPECT_FALSE(open.ok());
  auto junk = ParseToml("a = 1\nb = 2 3\n");
  ASSERT_FALSE(junk.ok());
  EXPECT_EQ(ParseErrorLine(junk.status()), 2);
  auto twice = ParseToml("[t]\n[t]\n");
  ASSERT_FALSE(twice.ok());
  EXPECT_EQ(ParseErrorLine(twice.status()), 2);
}

TEST(ScenarioTest, MinimalFileTakesDefaults) {
  auto s = ParseScenario(kMinimal);
  ASSERT_TRUE(s.ok()) << s.status();
  ASSERT_EQ(s->clusters.size(), 1u);
  EXPECT_EQ(s->clusters[0].small_drones, 4);
  EXPECT_EQ(s->clusters[0].leader_mode, device::kJetson10W4Core);
  EXPECT_EQ(s->clusters[0].leader_algorithm, device::kYoloV3Tiny);
  EXPECT_EQ(s->duration_s, 600);
  EXPECT_EQ(s->ledger.orderers, 3);
  EXPECT_EQ(s->ledger.peers, 3);
  EXPECT_EQ(s->ledger.batch_max_messages, 10);
  EXPECT_EQ(s->policy, policy::PolicyConfig{});
  EXPECT_EQ(s->mission, MissionParams{});
  auto profiles = ResolveProfiles(*s);
  ASSERT_TRUE(profiles.ok());
}

TEST(ScenarioTest, UnknownKeyIsNamed) {
  std::string text = std::string(kMinimal) + "spped = 3\n";
  auto s = ParseScenario(text);
  ASSERT_FALSE(s.ok());
  EXPECT_EQ(s.status().code(), absl::StatusCode::kInvalidArgument);
  EXPECT_TRUE(absl::StrContains(s.status().message(), "SchemaViolation")) << s.status();
  EXPECT_TRUE(absl::StrContains(s.status().message(), "cluster[0].spped")) << s.status();
}

TEST(ScenarioTest, TopLevelUnknownKeyIsNamed) {
  auto s = ParseScenario(std::string("spped = 3\n") + kMinimal);
  ASSERT_FALSE(s.ok());
  EXPECT_TRUE(absl::StrContains(s.status().message(), "'spped'")) << s.status();
}

TEST(ScenarioTest, ParseErrorReportsLine) {
  auto s = ParseScenario("area = [[0, 0], [1, 1]]\nboat = [0, 0\n");
  ASSERT_FALSE(s.ok());
  EXPECT_TRUE(absl::StrContains(s.status().message(), "ParseError(line ")) << s.status();
  EXPECT_EQ(ParseErrorLine(s.status()), 3);
}

TEST(ScenarioTest, SchemaChecks) {
  auto wrong_type = ParseScenario(std::string(kMinimal) + "small_drones = \"four\"\n");
  ASSERT_FALSE(wrong_type.ok());
  EXPECT_TRUE(absl::StrContains(wrong_type.status().message(), "small_drones"));

  auto outside = ParseScenario(R"(
area = [[0, 0], [100, 100]]
boat = [0, 0]
[[cluster]]
sub_area = [[0, 0], [200, 100]]
)");
  EXPECT_FALSE(outside.ok());

  auto zero = ParseScenario(std::string(kMinimal) + "small_drones = 0\n");
  EXPECT_FALSE(zero.ok());

  auto bad_mode = ParseScenario(std::string(kMinimal) + "leader_mode = \"99W\"\n");
  EXPECT_FALSE(bad_mode.ok());

  auto bad_fault = ParseScenario(std::string(kMinimal) +
                                 "[[fault]]\nat_s = 1\na = \"leader0\"\nb = \"nobody\"\n"
                                 "state = \"down\"\n");
  ASSERT_FALSE(bad_fault.ok());
  EXPECT_TRUE(absl::StrContains(bad_fault.status().message(), "nobody"));

  auto no_cluster = ParseScenario("area = [[0, 0], [1, 1]]\nboat = [0, 0]\n");
  EXPECT_FALSE(no_cluster.ok());

  EXPECT_EQ(LoadScenario("/no/such/file.toml").status().code(),
            absl::StatusCode::kNotFound);
}

TEST(ScenarioTest, BaselineShape) {
  Scenario s = Baseline();
  ASSERT_EQ(s.clusters.size(), 1u);
  EXPECT_EQ(s.clusters[0].small_drones, 4);
  EXPECT_EQ(s.ledger.orderers, 3);
  EXPECT_EQ(s.ledger.peers, 3);
  std::vector<std::string> names = NodeNames(s);
  auto count = [&](const char* prefix) {
    return std::count_if(names.begin(), names.end(),
                         [&](const std::string& n) { return absl::StartsWith(n, prefix); });
  };
  EXPECT_EQ(count("small"), 4);
  EXPECT_EQ(count("leader"), 1);
  EXPECT_EQ(count("orderer"), 3);
  EXPECT_EQ(count("peer"), 3);
  EXPECT_EQ(names.front(), "edge");
  EXPECT_FALSE(s.faults.empty());
}

TEST(ScenarioTest, ShippedFileMatchesBundledBaseline) {
  auto file = LoadScenario(std::string(IOD_SCENARIO_DIR) + "/paper-baseline.toml");
  ASSERT_TRUE(file.ok()) << file.status();
  EXPECT_EQ(*file, Baseline());
}

TEST(ScenarioTest, SaveLoadRoundTripOnBaseline) {
  Scenario s = Baseline();
  auto again = ParseScenario(SaveScenario(s));
  ASSERT_TRUE(again.ok()) << again.status();
  EXPECT_EQ(*again, s);
  EXPECT_EQ(SaveScenario(*again), SaveScenario(s));
}

// Varied scenarios with arbitrary doubles survive save and load unchanged.
TEST(ScenarioTest, SaveLoadRoundTripProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  const std::vector<std::string> leader_modes = {device::kJetson10W4Core,
                                                 device::kJetson15W4Core,
                                                 device::kJetson15W6Core};
  for (int trial = 0; trial < 100; ++trial) {
    Scenario s;
    s.name = absl::StrCat("trial \"", trial, "\"");
    s.seed = rng();
    s.duration_s = 60 + 900 * u(rng);
    const double w = 200 + 2000 * u(rng), h = 200 + 2000 * u(rng);
    s.area = {{0, 0}, {w, h}};
    s.boat = {-500 * u(rng), h * u(rng)};
    const int clusters = 1 + static_cast<int>(rng() % 3);
    for (int c = 0; c < clusters; ++c) {
      ClusterSpec spec;
      spec.sub_area = {{w * c / clusters, 0}, {c + 1 == clusters ? w : w * (c + 1) / clusters, h}};
      spec.small_drones = 1 + static_cast<int>(rng() % 6);
      if (rng() % 2) spec.leader_station = Vec2{w * u(rng), h * u(rng)};
      spec.leader_mode = leader_modes[rng() % leader_modes.size()];
      if (rng() % 2) spec.small_candidates = {device::kHog, device::kHaarCascades};
      s.clusters.push_back(spec);
    }
    for (int g = 0, n = static_cast<int>(rng() % 3); g < n; ++g) {
      s.gateways.push_back({w * u(rng), h * u(rng)});
    }
    for (int v = 0, n = static_cast<int>(rng() % 8); v < n; ++v) {
      s.victims.push_back({w * u(rng), h * u(rng)});
    }
    s.random_victims = static_cast<int>(rng() % 4);
    s.links.small_loss = 0.1 * u(rng);
    s.links.datagram_jitter_ms = u(rng);
    s.links.frame_jitter = rng() % 2;
    for (int f = 0, n = static_cast<int>(rng() % 4); f < n; ++f) {
      FaultSpec fault;
      fault.at_s = s.duration_s * u(rng);
      fault.a = "leader0";
      fault.b = rng() % 2 ? "edge" : "small0-0";
      fault.up = rng() % 2;
      s.faults.push_back(fault);
    }
    s.policy.objective = static_cast<policy::Objective>(rng() % 3);
    s.policy.min_accuracy = u(rng);
    s.policy.max_latency_ms = 100 + 1000 * u(rng);
    if (rng() % 2) s.policy.specific_rules.clear();
    s.mission.capture_period_s = 0.5 + u(rng);
    s.mission.urgent_fraction = u(rng);
    s.mission.frame_bytes = 1'000'000 + static_cast<int64_t>(rng() % 3'000'000);
    if (rng() % 2) s.small_drone.speed_mps = 5 + 10 * u(rng);
    if (rng() % 2) s.big_drone.hover_power_w = 1000 + 1000 * u(rng);
    if (rng() % 2) {
      AlgorithmSpec a;
      a.board = "small";
      a.algorithm = device::kHog;
      a.mode = device::kIntelUpMode;
      a.entry = {.fps = 1 + 5 * u(rng),
                 .active_power_mw = 5000 + 5000 * u(rng),
                 .accuracy = u(rng),
                 .false_positive_rate = 0.1 * u(rng)};
      s.algorithms.push_back(a);
    }
    s.ledger.enabled = rng() % 4 != 0;
    s.ledger.batch_timeout_s = 0.5 + 3 * u(rng);
    s.ledger.batch_max_messages = 1 + static_cast<int64_t>(rng() % 20);
    for (int t = 0, n = static_cast<int>(rng() % 3); t < n; ++t) {
      txflow::RescueTeamRecord team;
      team.team_id = absl::StrCat("team-", t);
      team.location = {w * u(rng), h * u(rng)};
      team.specialists = {"diver", "medic"};
      team.available = rng() % 2;
      s.teams.push_back(team);
    }
    for (int k = 0, n = static_cast<int>(rng() % 3); k < n; ++k) {
      txflow::HospitalRecord hospital;
      hospital.hospital_id = absl::StrCat("hospital-", k);
      hospital.location = {w * u(rng), h * u(rng)};
      hospital.capabilities = {"emergency_rooms"};
      s.hospitals.push_back(hospital);
    }
    ASSERT_TRUE(Validate(s).ok()) << "trial " << trial << ": " << Validate(s);
    const std::string text = SaveScenario(s);
    auto back = ParseScenario(text);
    ASSERT_TRUE(back.ok()) << "trial " << trial << ": " << back.status() << "\n" << text;
    EXPECT_EQ(*back, s) << "trial " << trial << "\n" << text;
  }
}

TEST(RunTest, SameSeedGivesIdenticalArtifacts) {
  Scenario s = Baseline();
  RunArtifacts a = MustRun(s, {.seed = 5});
  RunArtifacts b = MustRun(s, {.seed = 5});
  EXPECT_EQ(a.report_json, b.report_json);
  EXPECT_EQ(a.events_csv, b.events_csv);
  EXPECT_EQ(a.kernel_trace_csv, b.kernel_trace_csv);
  EXPECT_EQ(a.raft_jsonl, b.raft_jsonl);
  EXPECT_EQ(a.ledger_export, b.ledger_export);
  EXPECT_EQ(a.ledger_index_json, b.ledger_index_json);
}

TEST(RunTest, InvariantsHoldAcrossSeedsAndDiscoveryTimesMove) {
  Scenario s = Baseline();
  std::set<std::vector<int64_t>> discovery_patterns;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    RunArtifacts a = MustRun(s, {.seed = seed});
    for (const InvariantResult& r : a.invariants.checks) {
      EXPECT_TRUE(r.ok) << "seed " << seed << " " << r.name << ": " << r.detail;
    }
    std::vector<int64_t> times;
    for (const VictimMetrics& v : a.metrics.victims) {
      times.push_back(v.discovered_us.value_or(-1));
    }
    discovery_patterns.insert(times);
    EXPECT_EQ(a.metrics.urgent_delivered, a.metrics.urgent) << "seed " << seed;
  }
  EXPECT_GT(discovery_patterns.size(), 10u);
}

TEST(RunTest, EveryVerifiedPositiveIsCommitted) {
  auto sim = Simulation::Build(Baseline());
  ASSERT_TRUE(sim.ok());
  ASSERT_TRUE((*sim)->Run().ok());
  const Simulation& run = **sim;
  ASSERT_TRUE(run.LedgerSettled());
  const txflow::Gateway* gw = run.edge_gateway();
  ASSERT_NE(gw, nullptr);
  int verified = 0;
  for (const auto& u : run.mission().urgent()) {
    ++verified;
    ASSERT_TRUE(u.ledger_seq.has_value()) << "msg " << u.msg_id;
    uint64_t seq = *u.ledger_seq;
    while (gw->receipts()[seq].retried_as) seq = *gw->receipts()[seq].retried_as;
    EXPECT_EQ(gw->receipts()[seq].flag, ledger::ValidityFlag::kValid) << "msg " << u.msg_id;
  }
  EXPECT_GT(verified, 0);
}

TEST(RunTest, ReportRecomputesFromEventsCsv) {
  RunArtifacts a = MustRun(Baseline(), {.seed = 3});
  auto events = EventsFromCsv(a.events_csv);
  ASSERT_TRUE(events.ok()) << events.status();
  EXPECT_EQ(EventsToCsv(*events), a.events_csv);
  EXPECT_EQ(Aggregate(*events).ToJson(), a.metrics.ToJson());
  auto doc = nlohmann::json::parse(a.report_json);
  EXPECT_EQ(doc["metrics"], a.metrics.ToJson());
}

TEST(RunTest, EventsCsvRejectsBadRows) {
  EXPECT_FALSE(EventsFromCsv("nonsense\n").ok());
  EXPECT_FALSE(EventsFromCsv(absl::StrCat(kEventsCsvHeader, "\n1,x,y\n")).ok());
  EXPECT_FALSE(EventsFromCsv(absl::StrCat(kEventsCsvHeader, "\nq,x,y,1,a,b,1,2,3\n")).ok());
  std::vector<TraceEvent> ev = {{.t_us = 5, .kind = "k", .node = "a,b", .detail = "say \"hi\"\n"}};
  auto back = EventsFromCsv(EventsToCsv(ev));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, ev);
}

TEST(ReportTest, ModelTablesMatchMeasuredFigures) {
  auto model = ModelTables(Baseline());
  ASSERT_TRUE(model.ok()) << model.status();
  bool saw_yolo = false;
  for (const auto& row : (*model)["offload"]) {
    if (row["algorithm"] != device::kYoloV3Tiny) continue;
    saw_yolo = true;
    EXPECT_NEAR(row["local_ms"].get<double>(), 714, 5);
    EXPECT_NEAR(row["processing_mj"].get<double>(), 5600, 5600 * 0.02);
    EXPECT_GE(row["offload_ms"].get<double>(), 315);
    EXPECT_LE(row["offload_ms"].get<double>(), 320);
    EXPECT_DOUBLE_EQ(row["offload_mj"].get<double>(), 975);
    EXPECT_EQ(row["cheaper"], "offload");
  }
  EXPECT_TRUE(saw_yolo);
  std::map<int64_t, double> link;
  for (const auto& row : (*model)["link"]["rows"]) {
    link[row["bytes"].get<int64_t>()] = row["latency_ms"].get<double>();
  }
  EXPECT_NEAR(link.at(10000), 3.7, 1e-9);
  EXPECT_NEAR(link.at(65508), 5.6, 1e-9);
}

TEST(ReportTest, RenderedTablesHoldTheKeyRows) {
  RunArtifacts a = MustRun(Baseline());
  auto doc = nlohmann::json::parse(a.report_json);
  auto text = RenderTables(doc, {"offload", "link", "ledger"});
  ASSERT_TRUE(text.ok()) << text.status();
  EXPECT_TRUE(absl::StrContains(*text, "3.700"));
  EXPECT_TRUE(absl::StrContains(*text, "5.600"));
  EXPECT_TRUE(absl::StrContains(*text, "714.3"));
  EXPECT_TRUE(absl::StrContains(*text, "318.8"));
  EXPECT_TRUE(absl::StrContains(*text, "975.0"));
  EXPECT_TRUE(absl::StrContains(*text, "report_victim"));
  EXPECT_TRUE(absl::StrContains(*text, "update_drone_info"));
  EXPECT_TRUE(absl::StrContains(*text, "query_drone"));
  EXPECT_FALSE(RenderTables(doc, {"plots"}).ok());

  // Payload sizes of the three request classes: ~0.5, ~4 and ~16 MB.
  std::map<std::string, double> mb;
  for (const RequestClass& r : a.metrics.requests) {
    if (r.count) mb[r.function] = r.payload_bytes / 1048576.0 / r.count;
  }
  EXPECT_NEAR(mb.at("report_victim"), 0.5, 0.05);
  EXPECT_NEAR(mb.at("update_drone_info"), 4, 0.4);
  EXPECT_NEAR(mb.at("query_drone"), 16, 1.6);
}

TEST(ReportTest, FlattenCsvListsLeaves) {
  nlohmann::json doc = {{"a", {{"b", 1}, {"c", "x,y"}}}};
  EXPECT_EQ(FlattenCsv(doc), "key,value\n/a/b,1\n/a/c,\"x,y\"\n");
}

TEST(RunTest, UntilStopsEarlyAndFaultErrorsNameTheFault) {
  RunArtifacts a = MustRun(Baseline(), {.until_s = 30});
  EXPECT_EQ(a.metrics.end_us, 30'000'000);

  Scenario bad = Baseline();
  bad.faults.push_back({.at_s = 10, .a = "edge", .b = "edge", .up = false});
  auto sim = Simulation::Build(bad);
  EXPECT_FALSE(sim.ok());
}

}  // namespace
}  // namespace iod::scenario
