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

// End-to-end acceptance checks. Each test is one criterion; the listener in
// main() prints a single PASS/FAIL line per criterion with its runtime.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "gtest/gtest.h"
#include "iod/device/battery.h"
#include "iod/device/profiles.h"
#include "iod/ledger/block.h"
#include "iod/ledger/chain.h"
#include "iod/net/network.h"
#include "iod/policy/offload.h"
#include "iod/scenario/runner.h"
#include "iod/scenario/scenario.h"
#include "iod/sim/kernel.h"
#include "iod/sim/random.h"
#include "ordering_cluster.h"
#include "txflow_harness.h"

namespace iod {
namespace {

using device::kHaarCascades;
using device::kHog;
using device::kIntelUpMode;
using device::kJetson10W4Core;
using device::kJetson15W6Core;
using device::kYoloV3Tiny;

struct Criterion {
  int number;
  const char* title;
  double budget_s;
};

const std::map<std::string, Criterion>& Criteria() {
  static const auto* m = new std::map<std::string, Criterion>{
      {"OffloadArithmetic", {1, "offload arithmetic", 1}},
      {"EnergyIdentities", {2, "energy identities", 1}},
      {"EnduranceClaim", {3, "endurance claim", 1}},
      {"LinkModel", {4, "link model", 1}},
      {"LedgerIntegrity", {5, "ledger integrity", 30}},
      {"RaftSafetyAndLiveness", {6, "raft safety and liveness", 120}},
      {"ExecuteOrderValidate", {7, "execute-order-validate", 30}},
      {"ContractOracle", {8, "contract oracle", 10}},
      {"MissionFlow", {9, "mission flow", 60}},
      {"Determinism", {10, "determinism", 60}},
  };
  return *m;
}

// Fails the running test when it outlives its criterion's budget.
class Budget {
 public:
  Budget() : start_(std::chrono::steady_clock::now()) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    budget_s_ = Criteria().at(info->name()).budget_s;
  }
  ~Budget() {
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    EXPECT_LT(s, budget_s_) << "over the runtime budget";
  }

 private:
  std::chrono::steady_clock::time_point start_;
  double budget_s_ = 0;
};

scenario::Scenario Baseline() {
  auto s = scenario::LoadScenario("paper-baseline");
  EXPECT_TRUE(s.ok()) << s.status();
  return *s;
}

scenario::RunArtifacts RunBaseline(const scenario::Scenario& s, uint64_t seed,
                                   std::unique_ptr<scenario::Simulation>* keep = nullptr) {
  auto sim = scenario::Simulation::Build(s, {.seed = seed});
  EXPECT_TRUE(sim.ok()) << sim.status();
  EXPECT_TRUE((*sim)->Run().ok());
  auto a = scenario::MakeArtifacts(**sim);
  EXPECT_TRUE(a.ok()) << a.status();
  if (keep) *keep = *std::move(sim);
  return *std::move(a);
}

policy::DecisionInput Input(const device::DefaultProfiles& d, const net::RadioProfile& radio,
                            const char* small_algo) {
  policy::DecisionInput in;
  in.small = &d.small_drone.board;
  in.small_mode = kIntelUpMode;
  in.small_candidates = {small_algo};
  in.big = {&d.big_drone.board, kJetson10W4Core, kYoloV3Tiny};
  in.radio = &radio;
  return in;
}

TEST(Acceptance, OffloadArithmetic) {
  Budget budget;
  const device::DefaultProfiles d = device::MakeDefaultProfiles();
  const net::RadioProfile radio = net::DefaultWifiProfile(1000);

  auto yolo = policy::Decide(Input(d, radio, kYoloV3Tiny), policy::PolicyConfig{});
  ASSERT_TRUE(yolo.ok()) << yolo.status();
  EXPECT_GE(yolo->predicted.offload_latency_ms, 315);
  EXPECT_LE(yolo->predicted.offload_latency_ms, 320);
  EXPECT_NEAR(yolo->predicted.local_latency_ms, 714, 5);
  EXPECT_EQ(yolo->action, policy::ActionKind::kOffload);

  policy::PolicyConfig energy;
  energy.objective = policy::Objective::kMinimizeEnergy;
  energy.min_accuracy = 0;
  energy.max_latency_ms = 1e9;
  const std::map<std::string, double> local_mj = {{kHaarCascades, 2083}, {kHog, 2360}};
  for (const auto& [algo, mj] : local_mj) {
    auto r = policy::Decide(Input(d, radio, algo.c_str()), energy);
    ASSERT_TRUE(r.ok()) << algo << ": " << r.status();
    EXPECT_LT(std::abs(r->predicted.local_latency_ms - r->predicted.offload_latency_ms), 100)
        << algo;
    EXPECT_NEAR(r->predicted.local_energy_mj, mj, mj * 0.02) << algo;
    EXPECT_DOUBLE_EQ(r->predicted.offload_energy_mj, 975) << algo;
    EXPECT_EQ(r->action, policy::ActionKind::kOffload) << algo;
  }
}

TEST(Acceptance, EnergyIdentities) {
  Budget budget;
  const device::DefaultProfiles d = device::MakeDefaultProfiles();
  for (const device::DeviceProfile* p : {&d.small_drone.board, &d.big_drone.board}) {
    for (const auto& [key, e] : p->entries) {
      const double ms = *device::PerFrameLatencyMs(*p, key.first, key.second);
      EXPECT_NEAR(*device::ProcessingEnergyMj(*p, key.first, key.second),
                  e.active_power_mw * ms / 1000.0, 1e-9)
          << p->board_name << " " << key.first << "@" << key.second;
    }
  }
  const device::DeviceProfile& up = d.small_drone.board;
  EXPECT_NEAR(*device::ProcessingEnergyMj(up, kHaarCascades, kIntelUpMode), 2083, 2083 * 0.02);
  EXPECT_NEAR(*device::ProcessingEnergyMj(up, kHog, kIntelUpMode), 2360, 2360 * 0.02);
  EXPECT_NEAR(*device::ProcessingEnergyMj(up, kYoloV3Tiny, kIntelUpMode), 5600, 5600 * 0.02);

  // A 2.3 MB frame over the air at the planning latency, then at the fast
  // end of the envelope.
  std::map<double, double> frame_mj;
  for (double decision_ms : {300.0, 200.0}) {
    Kernel kernel(1);
    net::Network net(kernel);
    net.set_frame_jitter(false);
    net::RadioProfile radio = net::DefaultWifiProfile(1000);
    radio.frame.decision_ms = decision_ms;
    ASSERT_TRUE(net.Attach(NodeId{1}, {"s", net::NodeRole::kSmallDrone, 0, radio}, {0, 0}).ok());
    ASSERT_TRUE(net.Attach(NodeId{2}, {"l", net::NodeRole::kLeader, 0, radio}, {10, 0}).ok());
    ASSERT_TRUE(net.AddLink(NodeId{1}, NodeId{2}, net::LinkKind::kSmallToLeader).ok());
    net::Datagram frame;
    frame.src = NodeId{1};
    frame.dst = NodeId{2};
    frame.size_bytes = 2'300'000;
    frame.tag = "frame";
    auto r = net.SendFrame(frame);
    ASSERT_TRUE(r.ok()) << r.status();
    EXPECT_DOUBLE_EQ(r->latency_ms, decision_ms);
    frame_mj[decision_ms] = r->tx_energy_mj;
  }
  EXPECT_EQ(frame_mj[300], 975.0);
  EXPECT_EQ(frame_mj[200], 650.0);
  // The radio's transmit power is the slope between the two endpoints.
  EXPECT_DOUBLE_EQ((frame_mj[300] - frame_mj[200]) / (300 - 200) * 1000, 3250);
  EXPECT_DOUBLE_EQ(net::DefaultWifiProfile(1000).tx_power_mw, 3250);
}

TEST(Acceptance, EnduranceClaim) {
  Budget budget;
  const device::DefaultProfiles d = device::MakeDefaultProfiles();
  const double board_w =
      d.big_drone.board.Entry(kYoloV3Tiny, kJetson15W6Core)->active_power_mw / 1000;
  EXPECT_DOUBLE_EQ(board_w, 18.62);
  device::Battery battery(d.big_drone.battery_capacity_mj);
  const double hover_only = *device::EnduranceSeconds(battery, device::kBigHoverW);
  const double with_board = *device::EnduranceSeconds(battery, device::kBigHoverW + board_w);
  const double reduction_pct = (1 - with_board / hover_only) * 100;
  EXPECT_NEAR(reduction_pct, 1.23, 0.02);
}

TEST(Acceptance, LinkModel) {
  Budget budget;
  Kernel kernel(1);
  net::Network net(kernel);
  const net::RadioProfile radio = net::DefaultWifiProfile(1000);
  ASSERT_TRUE(net.Attach(NodeId{1}, {"s", net::NodeRole::kSmallDrone, 0, radio}, {0, 0}).ok());
  ASSERT_TRUE(net.Attach(NodeId{2}, {"l", net::NodeRole::kLeader, 0, radio}, {10, 0}).ok());
  ASSERT_TRUE(net.AddLink(NodeId{1}, NodeId{2}, net::LinkKind::kSmallToLeader).ok());
  auto send = [&](size_t bytes) {
    net::Datagram d;
    d.src = NodeId{1};
    d.dst = NodeId{2};
    d.size_bytes = bytes;
    auto r = net.SendDatagram(d);
    EXPECT_TRUE(r.ok()) << r.status();
    return r.ok() ? r->latency_ms : -1;
  };
  EXPECT_EQ(send(10000), 3.7);
  EXPECT_EQ(send(65508), 5.6);
  // The line through both measured points, by direct substitution.
  auto line = [](double s) { return 3.7 + (s - 10000.0) * (5.6 - 3.7) / (65508.0 - 10000.0); };
  for (size_t s = 1; s <= net::kMaxDatagramBytes; s += 641) {
    EXPECT_NEAR(radio.DatagramLatencyMs(s), line(static_cast<double>(s)), 1e-9) << s;
    EXPECT_NEAR(send(s), line(static_cast<double>(s)), 1e-9) << s;
  }
}

TEST(Acceptance, LedgerIntegrity) {
  Budget budget;
  const scenario::Scenario s = Baseline();
  RandomStream flips(2026, "acceptance-bitflip");
  int mutations = 0;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const scenario::RunArtifacts a = RunBaseline(s, seed);
    const std::string& bytes = a.ledger_export;
    const ledger::VerifyReport clean = ledger::VerifyExport(bytes);
    ASSERT_TRUE(clean.ok) << "seed " << seed << ": block " << clean.bad_block << " "
                          << ledger::BadBlockReasonName(clean.reason);
    auto chain = ledger::ImportChain(bytes);
    ASSERT_TRUE(chain.ok());
    EXPECT_EQ(clean.blocks_checked, chain->size());

    // Byte extents of each block in the export, from the encodings alone.
    std::vector<std::pair<size_t, size_t>> extents;
    size_t offset = ledger::kExportMagic.size();
    for (const ledger::Block& b : *chain) {
      const size_t len = 4 + ledger::EncodeBlock(b).size();
      extents.push_back({offset, offset + len});
      offset += len;
    }
    ASSERT_EQ(offset, bytes.size());
    for (int i = 0; i < 50; ++i, ++mutations) {
      const size_t pos = extents.front().first +
                         flips.NextU64() % (bytes.size() - extents.front().first);
      std::string m = bytes;
      m[pos] ^= static_cast<char>(1 << (flips.NextU64() % 8));
      uint64_t owner = 0;
      while (extents[owner].second <= pos) ++owner;
      const ledger::VerifyReport r = ledger::VerifyExport(m);
      ASSERT_FALSE(r.ok) << "seed " << seed << ": flip at byte " << pos << " undetected";
      EXPECT_EQ(r.bad_block, owner) << "seed " << seed << ": flip at byte " << pos << " ("
                                    << ledger::BadBlockReasonName(r.reason) << ")";
    }
  }
  EXPECT_EQ(mutations, 1000);
}

TEST(Acceptance, RaftSafetyAndLiveness) {
  Budget budget;
  using ordering::harness::Cluster;
  using ordering::harness::Tx;
  for (uint64_t seed = 1000; seed < 1050; ++seed) {
    SCOPED_TRACE("seed " + std::to_string(seed));
    Cluster c(seed, 3);
    RandomStream rng(seed, "acceptance-faults");
    c.RunUntil(SimTime::FromSeconds(1));
    uint64_t nonce = 0;
    SimTime next_fault = SimTime::FromSeconds(2);
    // At most one orderer out at a time, so a majority stays connected.
    std::optional<std::pair<int, bool>> out;  // (orderer, crashed?)
    SimTime heal_at;
    while (c.kernel_.now() < SimTime::FromSeconds(30)) {
      c.RunUntil(c.kernel_.now() + SimTime::FromMillis(100 + rng.NextU64() % 400));
      const int burst = static_cast<int>(rng.NextU64() % 4);
      for (int i = 0; i < burst; ++i) c.Submit(Tx(seed * 1000 + nonce++));
      if (out && c.kernel_.now() >= heal_at) {
        if (out->second) {
          c.orderers_[out->first]->Recover();
        } else {
          c.Isolate(c.orderer_ids_[out->first], net::LinkState::kUp);
        }
        out.reset();
        next_fault = c.kernel_.now() + SimTime::FromMillis(3000 + rng.NextU64() % 3000);
      } else if (!out && c.kernel_.now() >= next_fault) {
        const int leader = c.LeaderIndex();
        const int victim = leader >= 0 && rng.NextBernoulli(0.7)
                               ? leader
                               : static_cast<int>(rng.NextU64() % 3);
        const bool crash = rng.NextBernoulli(0.5);
        if (crash) {
          c.orderers_[victim]->Crash();
        } else {
          c.Isolate(c.orderer_ids_[victim], net::LinkState::kDown);
        }
        out = {victim, crash};
        heal_at = c.kernel_.now() + SimTime::FromMillis(1000 + rng.NextU64() % 2000);
      }
    }
    if (out && out->second) c.orderers_[out->first]->Recover();
    if (out && !out->second) c.Isolate(c.orderer_ids_[out->first], net::LinkState::kUp);
    c.RunUntil(SimTime::FromSeconds(40));
    for (const std::string& v : c.SafetyViolations()) ADD_FAILURE() << v;
    ASSERT_EQ(c.commit_at_.size(), c.submit_at_.size());
    for (const auto& [id, t] : c.submit_at_) {
      EXPECT_LE(c.commit_at_.at(id) - t, SimTime::FromSeconds(5));
    }
    for (int p = 1; p < 3; ++p) EXPECT_EQ(c.peer_blocks_[p], c.peer_blocks_[0]);
  }

  // Block cutting: 25 transactions at once give 10, 10, then 5 on the timeout.
  Cluster c(1, 3);
  c.RunUntil(SimTime::FromSeconds(1));
  const SimTime burst = c.kernel_.now();
  for (int i = 0; i < 25; ++i) c.Submit(Tx(i));
  c.RunUntil(SimTime::FromSeconds(5));
  for (const auto& blocks : c.peer_blocks_) {
    ASSERT_EQ(blocks.size(), 3u);
    EXPECT_EQ(blocks[0].txs.size(), 10u);
    EXPECT_EQ(blocks[1].txs.size(), 10u);
    EXPECT_EQ(blocks[2].txs.size(), 5u);
    const SimTime tail = blocks[2].header.timestamp - burst;
    EXPECT_GE(tail, SimTime::FromSeconds(2));
    EXPECT_LT(tail, SimTime::FromMillis(2050));
  }
  for (const std::string& v : c.SafetyViolations()) ADD_FAILURE() << v;
}

TEST(Acceptance, ExecuteOrderValidate) {
  Budget budget;
  using namespace txflow::harness;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    SCOPED_TRACE("seed " + std::to_string(seed));
    Pipeline p(seed);
    p.Seed();
    const uint64_t a =
        p.Invoke("DroneObject", "update_drone_info", Update("leader0", 1, "a"));
    const uint64_t b =
        p.Invoke("DroneObject", "update_drone_info", Update("leader0", 2, "b"));
    p.WaitFor(a);
    p.WaitFor(b);
    ASSERT_TRUE(p.gw().receipts()[a].flag && p.gw().receipts()[b].flag);
    EXPECT_EQ((std::multiset<ValidityFlag>{*p.gw().receipts()[a].flag,
                                           *p.gw().receipts()[b].flag}),
              (std::multiset<ValidityFlag>{ValidityFlag::kValid,
                                           ValidityFlag::kInvalidVersionConflict}));
    const auto& chain = p.peer(0).ledger().blocks();
    EXPECT_EQ(ChainFlags(chain), SerialOracle(chain));
    p.ExpectPeersIdentical();

    for (auto& o : p.dep_->orderers()) o->Crash();
    const size_t mark = p.net_.sends().size();
    auto q = p.QueryAndWait("DroneObject", "query_drone", {{"drone_id", "leader0"}});
    ASSERT_TRUE(q.ok()) << q.status();
    const auto& sends = p.net_.sends();
    EXPECT_GT(sends.size(), mark);
    const auto& orderers = p.orderer_nodes();
    for (size_t i = mark; i < sends.size(); ++i) {
      EXPECT_EQ(std::count(orderers.begin(), orderers.end(), sends[i].dst), 0)
          << sends[i].tag << " went to an orderer";
    }
  }
}

TEST(Acceptance, ContractOracle) {
  Budget budget;
  const txflow::harness::OracleCounts n = txflow::harness::CheckReportVictimOracle(200);
  EXPECT_EQ(n.cases, 200);
  EXPECT_GT(n.ties, 5);
  EXPECT_GT(n.unassigned, 5);
}

TEST(Acceptance, MissionFlow) {
  Budget budget;
  const scenario::Scenario s = Baseline();
  bool outage = false;
  for (const scenario::FaultSpec& f : s.faults) {
    outage = outage || (!f.up && f.a == "leader0" && f.b == "edge");
  }
  ASSERT_TRUE(outage) << "paper-baseline lost its leader-edge outage";
  std::map<std::string, int> routes;
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    SCOPED_TRACE("seed " + std::to_string(seed));
    std::unique_ptr<scenario::Simulation> sim;
    const scenario::RunArtifacts a = RunBaseline(s, seed, &sim);
    for (const char* name : {"energy_books_balance", "urgent_reaches_edge",
                             "no_duplicate_urgent", "stored_frames_only_by_sync"}) {
      bool found = false;
      for (const scenario::InvariantResult& r : a.invariants.checks) {
        if (r.name != name) continue;
        found = true;
        EXPECT_TRUE(r.ok) << name << ": " << r.detail;
      }
      EXPECT_TRUE(found) << name;
    }
    for (const fleet::UrgentRecord& u : sim->mission().urgent()) {
      EXPECT_TRUE(u.delivered_at.has_value()) << "msg " << u.msg_id;
      ++routes[fleet::RouteName(u.route)];
    }
  }
  // The outage must actually push reports off the direct path.
  EXPECT_GT(routes["relayed"] + routes["queued"], 0);
}

TEST(Acceptance, Determinism) {
  Budget budget;
  const scenario::Scenario s = Baseline();
  for (uint64_t seed : {1, 7}) {
    const scenario::RunArtifacts a = RunBaseline(s, seed);
    const scenario::RunArtifacts b = RunBaseline(s, seed);
    EXPECT_EQ(a.events_csv, b.events_csv) << "seed " << seed;
    EXPECT_EQ(a.kernel_trace_csv, b.kernel_trace_csv) << "seed " << seed;
    EXPECT_EQ(a.report_json, b.report_json) << "seed " << seed;
    EXPECT_EQ(a.ledger_export, b.ledger_export) << "seed " << seed;
    EXPECT_EQ(a.raft_jsonl, b.raft_jsonl) << "seed " << seed;
  }
  EXPECT_NE(RunBaseline(s, 1).events_csv, RunBaseline(s, 2).events_csv);
}

class CriterionPrinter : public ::testing::EmptyTestEventListener {
 public:
  void OnTestEnd(const ::testing::TestInfo& info) override {
    auto it = Criteria().find(info.name());
    if (it == Criteria().end()) return;
    const Criterion& c = it->second;
    lines_.push_back(absl::StrFormat(
        "criterion %2d %-26s %s  (%.2f s, budget %.0f s)", c.number, c.title,
        info.result()->Passed() ? "PASS" : "FAIL",
        info.result()->elapsed_time() / 1000.0, c.budget_s));
  }
  void OnTestProgramEnd(const ::testing::UnitTest&) override {
    std::printf("\nacceptance criteria\n");
    for (const std::string& l : lines_) std::printf("%s\n", l.c_str());
    std::fflush(stdout);
  }

 private:
  std::vector<std::string> lines_;
};

}  // namespace
}  // namespace iod

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(new iod::CriterionPrinter);
  return RUN_ALL_TESTS();
}
