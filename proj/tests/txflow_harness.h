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

#ifndef IOD_TESTS_TXFLOW_HARNESS_H_
#define IOD_TESTS_TXFLOW_HARNESS_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "absl/strings/match.h"
#include "gtest/gtest.h"
#include "iod/sim/random.h"
#include "iod/ledger/block.h"
#include "iod/ledger/chain.h"
#include "iod/ledger/world_state.h"
#include "iod/net/network.h"
#include "iod/ordering/trace.h"
#include "iod/sim/kernel.h"
#include "iod/txflow/contracts.h"
#include "iod/txflow/deployment.h"
#include "iod/txflow/gateway.h"
#include "json.hpp"

namespace iod::txflow::harness {

using Json = nlohmann::json;
using ledger::ValidityFlag;

// Commits an execution result as the next block of `state`.
inline void Commit(ledger::WorldState& state, const ExecResult& r) {
  ledger::Block b;
  b.header.number = state.next_block();
  ledger::Transaction tx;
  tx.write_set = r.write_set;
  b.txs.push_back(tx);
  b.flags = {ValidityFlag::kValid};
  ASSERT_TRUE(state.Apply(b).ok());
}

inline ExecResult Exec(ledger::WorldState& state, const std::string& contract,
               const std::string& fn, const Json& args) {
  auto r = Execute(state, contract, fn, args.dump());
  EXPECT_TRUE(r.ok()) << r.status();
  if (!r.ok()) return {};
  Commit(state, *r);
  return *r;
}

inline Json TeamArg(const std::string& id, double x, double y,
             std::vector<std::string> specialists = {}) {
  return {{"team_id", id},
          {"location", {{"x", x}, {"y", y}}},
          {"specialists", specialists}};
}

inline Json HospitalArg(const std::string& id, double x, double y,
                 std::set<std::string> caps) {
  return {{"hospital_id", id},
          {"location", {{"x", x}, {"y", y}}},
          {"capabilities", caps}};
}

inline Json DroneArg(const std::string& id) {
  return {{"drone_id", id}, {"location", {{"x", 0.0}, {"y", 0.0}}}};
}

inline Json Report(const std::string& case_id, double x, double y,
            const std::string& urgency = "normal") {
  return {{"case_id", case_id},
          {"drone_id", "leader0"},
          {"location", {{"x", x}, {"y", y}}},
          {"urgency", urgency}};
}

inline ledger::WorldState SeededState() {
  ledger::WorldState s;
  Exec(s, "DroneObject", "register_drones",
      {{"drones", Json::array({DroneArg("leader0")})}});
  return s;
}

inline RescueTeamRecord TeamIn(const ledger::WorldState& s, const std::string& id) {
  return *DecodeTeam(s.Get(TeamKey(id))->value);
}

inline VictimCase CaseIn(const ledger::WorldState& s, const std::string& id) {
  return *DecodeCase(s.Get(CaseKey(id))->value);
}

// Independent reference for nearest-feasible selection: sort every candidate
// by (distance, id) and take the first.
template <typename T, typename Feasible, typename Loc, typename Id>
std::optional<std::string> BruteForce(const std::vector<T>& all, Vec2 at,
                                      Feasible ok, Loc loc, Id id) {
  std::vector<std::tuple<double, std::string>> c;
  for (const T& x : all) {
    if (!ok(x)) continue;
    const double dx = loc(x).x - at.x;
    const double dy = loc(x).y - at.y;
    c.emplace_back(std::sqrt(dx * dx + dy * dy), id(x));
  }
  if (c.empty()) return std::nullopt;
  std::sort(c.begin(), c.end());
  return std::get<1>(c.front());
}

inline constexpr NodeId kEdge{1};

class Pipeline {
 public:
  explicit Pipeline(uint64_t seed, LedgerLayout layout = {})
      : kernel_(seed), net_(kernel_) {
    net::NodeInfo info;
    info.name = "edge";
    info.role = net::NodeRole::kEdgeSink;
    info.radio = net_.lan_profile();
    EXPECT_TRUE(net_.Attach(kEdge, info, {0, 0}).ok());
    layout.clients = {{kEdge, "edge"}};
    auto d = LedgerDeployment::Build(net_, layout, &trace_);
    EXPECT_TRUE(d.ok()) << d.status();
    dep_ = *std::move(d);
    dep_->Start();
    gw().Install();
    RunFor(SimTime::FromSeconds(1));  // first election
  }

  Gateway& gw() { return *dep_->gateways()[0]; }
  Peer& peer(int i) { return *dep_->peers()[i]; }
  NodeId peer_node(int i) const { return dep_->peer_nodes()[i]; }
  const std::vector<NodeId>& orderer_nodes() const { return dep_->orderer_nodes(); }

  void RunFor(SimTime dt) { (void)kernel_.RunUntil(kernel_.now() + dt); }

  uint64_t Invoke(const std::string& c, const std::string& f, const Json& args) {
    auto seq = gw().Invoke(c, f, args.dump());
    EXPECT_TRUE(seq.ok()) << seq.status();
    return *seq;
  }

  TxReceipt InvokeAndWait(const std::string& c, const std::string& f,
                          const Json& args) {
    const uint64_t seq = Invoke(c, f, args);
    WaitFor(seq);
    return gw().receipts()[seq];
  }

  void WaitFor(uint64_t seq) {
    for (int i = 0; i < 300 && !gw().receipts()[seq].finished(); ++i) {
      RunFor(SimTime::FromMillis(100));
    }
    EXPECT_TRUE(gw().receipts()[seq].finished());
  }

  absl::StatusOr<std::string> QueryAndWait(const std::string& c,
                                           const std::string& f,
                                           const Json& args) {
    std::optional<absl::StatusOr<std::string>> out;
    EXPECT_TRUE(gw().Query(c, f, args.dump(), [&](auto r) { out = r; }).ok());
    for (int i = 0; i < 100 && !out; ++i) RunFor(SimTime::FromMillis(50));
    EXPECT_TRUE(out.has_value());
    return out.value_or(absl::InternalError("no answer"));
  }

  void Seed() {
    EXPECT_EQ(InvokeAndWait("DroneObject", "register_drones",
                            {{"drones", Json::array({DroneArg("leader0"),
                                                     DroneArg("leader1")})}})
                  .flag,
              ValidityFlag::kValid);
    EXPECT_EQ(InvokeAndWait("RescueTeam", "register_teams",
                            {{"teams", Json::array({TeamArg("t1", 0, 0),
                                                    TeamArg("t2", 500, 0),
                                                    TeamArg("t3", 0, 900)})}})
                  .flag,
              ValidityFlag::kValid);
    EXPECT_EQ(InvokeAndWait("Hospital", "register_hospitals",
                            {{"hospitals", Json::array({HospitalArg(
                                               "h1", 10, 10, {"emergency_rooms"})})}})
                  .flag,
              ValidityFlag::kValid);
  }

  // Cuts (or restores) every link between peer `i` and the orderers.
  void SeverFromOrderers(int i, net::LinkState s) {
    for (NodeId o : orderer_nodes()) {
      ASSERT_TRUE(net_.SetLinkState(peer_node(i), o, s).ok());
    }
  }

  void ExpectPeersIdentical() {
    for (int i = 1; i < 3; ++i) {
      ASSERT_EQ(peer(i).ledger().height(), peer(0).ledger().height());
      for (uint64_t n = 0; n < peer(0).ledger().height(); ++n) {
        EXPECT_EQ(ledger::EncodeBlock(peer(i).ledger().blocks()[n]),
                  ledger::EncodeBlock(peer(0).ledger().blocks()[n]));
      }
      EXPECT_EQ(peer(i).ledger().state().Snapshot(),
                peer(0).ledger().state().Snapshot());
    }
  }

  Kernel kernel_;
  net::Network net_;
  ordering::RaftTrace trace_;
  std::unique_ptr<LedgerDeployment> dep_;
};

inline Json Update(const std::string& drone, double x, const std::string& digest) {
  return {{"drone_id", drone},
          {"location", {{"x", x}, {"y", 0.0}}},
          {"battery", 0.9},
          {"payload_digest", digest}};
}

// Serial re-execution oracle: replays the ordered stream, marking a
// transaction Valid iff its recorded reads match the replayed versions.
inline std::vector<ValidityFlag> SerialOracle(const std::vector<ledger::Block>& chain) {
  std::map<std::string, ledger::Version> versions;
  std::set<ledger::Digest> seen;
  std::vector<ValidityFlag> out;
  for (const ledger::Block& b : chain) {
    if (b.header.number == 0) continue;
    for (uint32_t i = 0; i < b.txs.size(); ++i) {
      const ledger::Transaction& tx = b.txs[i];
      if (!seen.insert(tx.tx_id).second) {
        out.push_back(ValidityFlag::kDuplicateTxId);
        continue;
      }
      bool fresh = true;
      for (const auto& r : tx.read_set) {
        auto it = versions.find(r.key);
        std::optional<ledger::Version> now;
        if (it != versions.end()) now = it->second;
        if (now != r.version) fresh = false;
      }
      if (!fresh) {
        out.push_back(ValidityFlag::kInvalidVersionConflict);
        continue;
      }
      for (const auto& w : tx.write_set) {
        versions[w.key] = {b.header.number, i};
      }
      out.push_back(ValidityFlag::kValid);
    }
  }
  return out;
}

inline std::vector<ValidityFlag> ChainFlags(const std::vector<ledger::Block>& chain) {
  std::vector<ValidityFlag> out;
  for (const auto& b : chain) {
    if (b.header.number == 0) continue;
    out.insert(out.end(), b.flags.begin(), b.flags.end());
  }
  return out;
}

struct OracleCounts {
  int cases = 0;
  int ties = 0;
  int unassigned = 0;
};

// Randomized report_victim cases checked against BruteForce over the state
// before each transaction; mismatches are gtest failures.
inline OracleCounts CheckReportVictimOracle(int total) {
  const std::vector<std::string> kSkills = {"climber", "diver", "medic"};
  const std::vector<std::string> kCaps = {"blood_suppliers", "emergency_rooms",
                                          "laboratories"};
  int cases = 0;
  int ties = 0;
  int unassigned = 0;
  for (uint64_t seed = 1; cases < total; ++seed) {
    RandomStream rng(seed, "contract-oracle");
    ledger::WorldState s = SeededState();
    // Small integer grid so equal distances happen often.
    auto coord = [&] { return static_cast<double>(rng.NextU64() % 7) * 100.0; };
    Json teams = Json::array();
    const int n_teams = 1 + static_cast<int>(rng.NextU64() % 6);
    for (int t = 0; t < n_teams; ++t) {
      std::vector<std::string> sk;
      for (const auto& k : kSkills) {
        if (rng.NextBernoulli(0.5)) sk.push_back(k);
      }
      teams.push_back(TeamArg("team" + std::to_string(t), coord(), coord(), sk));
    }
    Json hospitals = Json::array();
    const int n_h = 1 + static_cast<int>(rng.NextU64() % 4);
    for (int h = 0; h < n_h; ++h) {
      std::set<std::string> caps;
      for (const auto& k : kCaps) {
        if (rng.NextBernoulli(0.5)) caps.insert(k);
      }
      if (caps.empty()) caps.insert(kCaps[rng.NextU64() % 3]);
      hospitals.push_back(HospitalArg("hosp" + std::to_string(h), coord(), coord(), caps));
    }
    Exec(s, "RescueTeam", "register_teams", {{"teams", teams}});
    Exec(s, "Hospital", "register_hospitals", {{"hospitals", hospitals}});

    for (int k = 0; k < 5 && cases < total; ++k, ++cases) {
      Json report = Report("case" + std::to_string(k), coord(), coord(),
                           rng.NextBernoulli(0.4) ? "urgent" : "normal");
      std::vector<std::string> need;
      if (rng.NextBernoulli(0.5)) need.push_back(kSkills[rng.NextU64() % 3]);
      report["specialists"] = need;
      std::set<std::string> hneed;
      if (rng.NextBernoulli(0.5)) hneed.insert(kCaps[rng.NextU64() % 3]);
      report["hospital_needs"] = hneed;
      const Vec2 at{report["location"]["x"].get<double>(),
                    report["location"]["y"].get<double>()};

      // Oracle over the pre-transaction state.
      std::vector<RescueTeamRecord> pre_teams;
      for (int t = 0; t < n_teams; ++t) {
        pre_teams.push_back(TeamIn(s, "team" + std::to_string(t)));
      }
      std::vector<HospitalRecord> pre_h;
      for (int h = 0; h < n_h; ++h) {
        pre_h.push_back(*DecodeHospital(
            s.Get(HospitalKey("hosp" + std::to_string(h)))->value));
      }
      auto want_team = BruteForce(
          pre_teams, at,
          [&](const RescueTeamRecord& t) {
            if (!t.available) return false;
            for (const auto& n : need) {
              if (std::count(t.specialists.begin(), t.specialists.end(), n) == 0) {
                return false;
              }
            }
            return true;
          },
          [](const auto& t) { return t.location; },
          [](const auto& t) { return t.team_id; });
      std::optional<std::string> want_h;
      if (report["urgency"] == "urgent") {
        std::set<std::string> eff = hneed.empty()
                                        ? std::set<std::string>{"emergency_rooms"}
                                        : hneed;
        want_h = BruteForce(
            pre_h, at,
            [&](const HospitalRecord& h) {
              for (const auto& n : eff) {
                if (!h.capabilities.contains(n)) return false;
              }
              return true;
            },
            [](const auto& h) { return h.location; },
            [](const auto& h) { return h.hospital_id; });
      }
      // Count configurations where the tie rule decides.
      std::map<double, int> dist_count;
      for (const auto& t : pre_teams) {
        if (t.available) ++dist_count[Distance(t.location, at)];
      }
      if (want_team && dist_count[Distance(TeamIn(s, *want_team).location, at)] > 1) {
        ++ties;
      }

      ExecResult r = Exec(s, "DroneObject", "report_victim", report);
      const Json resp = Json::parse(r.response);
      const VictimCase c = CaseIn(s, report["case_id"]);
      SCOPED_TRACE("seed " + std::to_string(seed) + " case " + c.case_id);
      EXPECT_EQ(c.team, want_team);
      EXPECT_EQ(resp["team"].is_null() ? std::nullopt
                                       : std::optional(resp["team"].get<std::string>()),
                want_team);
      EXPECT_EQ(c.hospital, want_h);
      if (!want_team) ++unassigned;

      // No team serves two open cases.
      std::map<std::string, int> open;
      for (const auto& [key, v] : s.entries()) {
        if (!key.starts_with("victim/")) continue;
        VictimCase vc = *DecodeCase(v.value);
        if (vc.status == CaseStatus::kAssigned) ++open[*vc.team];
      }
      for (const auto& [team, n] : open) EXPECT_EQ(n, 1) << team;
    }
  }
  return {cases, ties, unassigned};
}

}  // namespace iod::txflow::harness

#endif  // IOD_TESTS_TXFLOW_HARNESS_H_
