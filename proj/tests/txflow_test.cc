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
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "absl/strings/match.h"
#include "gtest/gtest.h"
#include "iod/ledger/block.h"
#include "iod/ledger/chain.h"
#include "iod/ledger/world_state.h"
#include "iod/net/network.h"
#include "iod/ordering/client.h"
#include "iod/sim/kernel.h"
#include "iod/sim/random.h"
#include "iod/txflow/contracts.h"
#include "iod/txflow/deployment.h"
#include "iod/txflow/gateway.h"
#include "json.hpp"
#include "txflow_harness.h"

namespace iod::txflow {
namespace {

using namespace harness;

// ---- Dispatch and records ----------------------------------------------------

TEST(ContractTest, FunctionsDispatchOnlyWithinTheirContract) {
  EXPECT_TRUE(LookupFunction("DroneObject", "report_victim").ok());
  EXPECT_EQ(LookupFunction("RescueTeam", "report_victim").status().code(),
            absl::StatusCode::kNotFound);
  EXPECT_EQ(LookupFunction("Hospital", "query_drone").status().code(),
            absl::StatusCode::kNotFound);
  EXPECT_FALSE(LookupFunction("Bank", "transfer").ok());
  for (const FunctionSpec& f : AllFunctions()) {
    auto found = LookupFunction(ContractName(f.contract), f.name);
    ASSERT_TRUE(found.ok());
    EXPECT_EQ(*found, &f);
  }
  EXPECT_TRUE((*LookupFunction("DroneObject", "query_drone"))->read_only);
  EXPECT_FALSE((*LookupFunction("DroneObject", "update_drone_info"))->read_only);
}

TEST(ContractTest, RequestSizeClasses) {
  EXPECT_EQ((*LookupFunction("DroneObject", "update_drone_info"))->payload_bytes,
            4u * 1024 * 1024);
  EXPECT_EQ((*LookupFunction("DroneObject", "report_victim"))->payload_bytes,
            512u * 1024);
  EXPECT_EQ((*LookupFunction("DroneObject", "query_drone"))->payload_bytes,
            16u * 1024 * 1024);
}

TEST(ContractTest, RecordsRoundTripAsCanonicalJson) {
  DroneRecord d{"leader0", {1.5, -2}, 0.75, 3, {"small0", "small1"}, {"ab"}};
  EXPECT_EQ(*DecodeDrone(EncodeDrone(d)), d);
  RescueTeamRecord t{"team-a", {10, 20}, {"diver", "medic"}, false, "c1", {"c0"}};
  EXPECT_EQ(*DecodeTeam(EncodeTeam(t)), t);
  HospitalRecord h{"h1", {3, 4}, {"blood_suppliers", "emergency_rooms"}};
  EXPECT_EQ(*DecodeHospital(EncodeHospital(h)), h);
  VictimCase c;
  c.case_id = "c1";
  c.drone_id = "leader0";
  c.urgency = Urgency::kUrgent;
  c.required_capabilities = {"laboratories"};
  c.status = CaseStatus::kAssigned;
  c.team = "team-a";
  c.reported_us = 12345;
  EXPECT_EQ(*DecodeCase(EncodeCase(c)), c);

  // Sorted keys and no whitespace.
  const std::string text = EncodeHospital(h);
  EXPECT_EQ(text,
            "{\"capabilities\":[\"blood_suppliers\",\"emergency_rooms\"],"
            "\"hospital_id\":\"h1\",\"location\":{\"x\":3.0,\"y\":4.0}}");
  EXPECT_FALSE(DecodeTeam("{\"team_id\":").ok());
}

TEST(ContractTest, ContextRecordsFirstReadVersionAndReadsOwnWrites) {
  ledger::WorldState s = SeededState();
  TxContext ctx(s);
  EXPECT_EQ(ctx.Get("absent"), std::nullopt);
  ASSERT_TRUE(ctx.Get(DroneKey("leader0")).has_value());
  ctx.Put("zeta", "1");
  ctx.Put("alpha", "2");
  EXPECT_EQ(ctx.Get("zeta"), "1");  // no read entry for own write
  auto reads = ctx.read_set();
  ASSERT_EQ(reads.size(), 2u);
  EXPECT_EQ(reads[0].key, "absent");
  EXPECT_EQ(reads[0].version, std::nullopt);
  EXPECT_EQ(reads[1].key, DroneKey("leader0"));
  EXPECT_EQ(reads[1].version, (ledger::Version{0, 0}));
  auto writes = ctx.write_set();
  ASSERT_EQ(writes.size(), 2u);
  EXPECT_EQ(writes[0].key, "alpha");
}

TEST(ContractTest, ExecutionIsPureAndDeterministic) {
  ledger::WorldState s = SeededState();
  Exec(s, "RescueTeam", "register_teams",
      {{"teams", Json::array({TeamArg("t1", 0, 0)})}});
  const std::string before = s.Snapshot();
  const std::string args = Report("c1", 1, 1).dump();
  auto a = Execute(s, "DroneObject", "report_victim", args);
  auto b = Execute(s, "DroneObject", "report_victim", args);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(*a, *b);
  EXPECT_EQ(s.Snapshot(), before);
  EXPECT_FALSE(a->write_set.empty());

  auto q = Execute(s, "RescueTeam", "query_team", R"({"team_id":"t1"})");
  ASSERT_TRUE(q.ok());
  EXPECT_TRUE(q->write_set.empty());
}

TEST(ContractTest, ErrorsAreNamed) {
  ledger::WorldState s = SeededState();
  auto unknown = Execute(s, "DroneObject", "update_drone_info",
                         R"({"drone_id":"ghost","location":{"x":0,"y":0},"battery":1})");
  EXPECT_EQ(unknown.status().code(), absl::StatusCode::kNotFound);
  EXPECT_TRUE(absl::StartsWith(unknown.status().message(), "UnknownDrone"));
  auto empty = Execute(
      s, "Hospital", "register_hospitals",
      Json{{"hospitals", Json::array({HospitalArg("h", 0, 0, {})})}}.dump());
  EXPECT_TRUE(absl::StartsWith(empty.status().message(), "EmptyCapabilities"));
  auto bad = Execute(s, "DroneObject", "update_drone_info", "[1,2]");
  EXPECT_TRUE(absl::StartsWith(bad.status().message(), "BadArgs"));
  auto missing = Execute(s, "DroneObject", "update_drone_info", "{}");
  EXPECT_TRUE(absl::StartsWith(missing.status().message(), "BadArgs"));
  auto drone = Execute(s, "DroneObject", "report_victim",
                       Json{{"case_id", "c"},
                            {"drone_id", "ghost"},
                            {"location", {{"x", 0}, {"y", 0}}}}
                           .dump());
  EXPECT_TRUE(absl::StartsWith(drone.status().message(), "UnknownDrone"));
}

TEST(ContractTest, UpdateDroneInfoKeepsBoundedHistory) {
  ledger::WorldState s = SeededState();
  for (int i = 0; i < 40; ++i) {
    Exec(s, "DroneObject", "update_drone_info",
        {{"drone_id", "leader0"},
         {"location", {{"x", i}, {"y", 2 * i}}},
         {"battery", 1.0 - i / 100.0},
         {"payload_digest", "p" + std::to_string(i)}});
  }
  DroneRecord d = *DecodeDrone(s.Get(DroneKey("leader0"))->value);
  EXPECT_EQ(d.location, (Vec2{39, 78}));
  EXPECT_DOUBLE_EQ(d.battery_fraction, 0.61);
  ASSERT_EQ(d.history_refs.size(), kMaxHistoryRefs);
  EXPECT_EQ(d.history_refs.back(), "p39");
  EXPECT_EQ(d.history_refs.front(), "p8");
}

// ---- Assignment rules -----------------------------------------------------------

TEST(ContractTest, NearestAvailableTeamWins) {
  ledger::WorldState s = SeededState();
  Exec(s, "RescueTeam", "register_teams",
      {{"teams", Json::array({TeamArg("far", 5000, 0), TeamArg("near", 2000, 0)})}});
  // Occupy the near team first.
  Exec(s, "DroneObject", "report_victim", Report("first", 2000, 0));
  ASSERT_EQ(CaseIn(s, "first").team, "near");
  ExecResult r = Exec(s, "DroneObject", "report_victim", Report("second", 0, 0));
  EXPECT_EQ(Json::parse(r.response)["team"], "far");
  EXPECT_FALSE(TeamIn(s, "far").available);
  EXPECT_EQ(TeamIn(s, "far").assigned_case, "second");
}

TEST(ContractTest, SingleTeamAnywhereIsChosen) {
  ledger::WorldState s = SeededState();
  Exec(s, "RescueTeam", "register_teams",
      {{"teams", Json::array({TeamArg("only", -1e5, 7e4)})}});
  Exec(s, "DroneObject", "report_victim", Report("c", 3, 3));
  EXPECT_EQ(CaseIn(s, "c").team, "only");
}

TEST(ContractTest, EqualDistanceGoesToLowerTeamId) {
  ledger::WorldState s = SeededState();
  Exec(s, "RescueTeam", "register_teams",
      {{"teams", Json::array({TeamArg("t-b", 0, 10), TeamArg("t-a", 0, -10)})}});
  Exec(s, "DroneObject", "report_victim", Report("c", 0, 0));
  EXPECT_EQ(CaseIn(s, "c").team, "t-a");
}

TEST(ContractTest, UrgentCaseSkipsHospitalLackingCapability) {
  ledger::WorldState s = SeededState();
  Exec(s, "RescueTeam", "register_teams",
      {{"teams", Json::array({TeamArg("t", 0, 0)})}});
  Exec(s, "Hospital", "register_hospitals",
      {{"hospitals",
        Json::array({HospitalArg("close", 100, 0, {"emergency_rooms"}),
                     HospitalArg("farther", 900, 0,
                                 {"blood_suppliers", "emergency_rooms"})})}});
  Json urgent = Report("u", 0, 0, "urgent");
  urgent["hospital_needs"] = {"blood_suppliers"};
  ExecResult r = Exec(s, "DroneObject", "report_victim", urgent);
  EXPECT_EQ(Json::parse(r.response)["hospital"], "farther");
  // No stated needs: emergency rooms, so the closer one qualifies.
  Exec(s, "RescueTeam", "register_teams",
      {{"teams", Json::array({TeamArg("t2", 0, 0)})}});
  Exec(s, "DroneObject", "report_victim", Report("u2", 0, 0, "urgent"));
  EXPECT_EQ(CaseIn(s, "u2").hospital, "close");
  // Normal cases get no hospital.
  Exec(s, "DroneObject", "report_victim", Report("n", 0, 0));
  EXPECT_EQ(CaseIn(s, "n").hospital, std::nullopt);
  EXPECT_FALSE(CaseIn(s, "n").no_hospital_match);

  Json impossible = Report("x", 0, 0, "urgent");
  impossible["hospital_needs"] = {"laboratories"};
  ExecResult none = Exec(s, "DroneObject", "report_victim", impossible);
  EXPECT_EQ(Json::parse(none.response)["hospital_outcome"], "NoHospitalMatch");
  EXPECT_TRUE(CaseIn(s, "x").no_hospital_match);
}

TEST(ContractTest, WaitingCasesAreServedByPriorityOnRelease) {
  ledger::WorldState s = SeededState();
  Exec(s, "RescueTeam", "register_teams",
      {{"teams", Json::array({TeamArg("t", 0, 0)})}});
  Exec(s, "DroneObject", "report_victim", Report("busy", 0, 0));
  Json early = Report("early", 1, 1);
  early["reported_us"] = 100;
  Json late_urgent = Report("late-urgent", 9, 9, "urgent");
  late_urgent["reported_us"] = 200;
  ExecResult r = Exec(s, "DroneObject", "report_victim", early);
  EXPECT_EQ(Json::parse(r.response)["outcome"], "NoTeamAvailable");
  Exec(s, "DroneObject", "report_victim", late_urgent);
  EXPECT_EQ(Json::parse(s.Get(kPendingQueueKey)->value),
            Json::array({"late-urgent", "early"}));

  Exec(s, "RescueTeam", "release_team", {{"team_id", "t"}});
  EXPECT_EQ(CaseIn(s, "busy").status, CaseStatus::kClosed);
  EXPECT_EQ(CaseIn(s, "late-urgent").team, "t");
  EXPECT_EQ(TeamIn(s, "t").assigned_case, "late-urgent");
  EXPECT_EQ(TeamIn(s, "t").archive_refs, std::vector<std::string>{"busy"});
  Exec(s, "RescueTeam", "release_team", {{"team_id", "t"}});
  EXPECT_EQ(CaseIn(s, "early").team, "t");
  EXPECT_EQ(Json::parse(s.Get(kPendingQueueKey)->value), Json::array());
  Exec(s, "RescueTeam", "release_team", {{"team_id", "t"}});
  EXPECT_TRUE(TeamIn(s, "t").available);
  auto again = Execute(s, "RescueTeam", "release_team", R"({"team_id":"t"})");
  EXPECT_TRUE(absl::StartsWith(again.status().message(), "TeamNotAssigned"));
}

TEST(ContractPropertyTest, ReportVictimMatchesBruteForceSearch) {
  const OracleCounts n = CheckReportVictimOracle(200);
  EXPECT_EQ(n.cases, 200);
  // The sample exercises the tie rule and the no-team path.
  EXPECT_GT(n.ties, 5);
  EXPECT_GT(n.unassigned, 5);
}

// ---- Pipeline on the simulated LAN -----------------------------------------------

TEST(PipelineTest, UpdateThenQueryReturnsLatestRecord) {
  Pipeline p(1);
  p.Seed();
  TxReceipt r = p.InvokeAndWait("DroneObject", "update_drone_info",
                                Update("leader0", 42, "img-1"));
  EXPECT_EQ(r.endorsements, 3);
  EXPECT_EQ(r.flag, ValidityFlag::kValid);
  EXPECT_TRUE(r.error.empty());
  EXPECT_GT(*r.committed_at, r.proposed_at);
  // The 4 MiB image blob travels with the transaction.
  EXPECT_GE(r.wire_bytes, kUpdateInfoBytes);
  EXPECT_LT(r.wire_bytes, kUpdateInfoBytes + 4096);

  auto q = p.QueryAndWait("DroneObject", "query_drone", {{"drone_id", "leader0"}});
  ASSERT_TRUE(q.ok()) << q.status();
  DroneRecord d = *DecodeDrone(*q);
  EXPECT_EQ(d.location.x, 42);
  EXPECT_EQ(d.history_refs, std::vector<std::string>{"img-1"});
  // The reply carries the 16 MiB data-drone result.
  EXPECT_GE(p.gw().queries().back().reply_bytes, kQueryDroneBytes);
  p.ExpectPeersIdentical();
}

TEST(PipelineTest, OnePartitionedPeerStillSatisfiesPolicy) {
  Pipeline p(2);
  p.Seed();
  ASSERT_TRUE(p.net_.SetLinkState(kEdge, p.peer_node(2), net::LinkState::kDown).ok());
  TxReceipt r = p.InvokeAndWait("DroneObject", "update_drone_info",
                                Update("leader0", 1, "a"));
  EXPECT_EQ(r.endorsements, 2);
  EXPECT_EQ(r.flag, ValidityFlag::kValid);
  // The gateway waited out the silent endorser.
  EXPECT_GE(*r.endorsed_at - r.proposed_at, SimTime::FromSeconds(1));
  p.ExpectPeersIdentical();  // peer2 still hears the orderers
}

TEST(PipelineTest, TooFewReachableEndorsersIsPolicyUnsatisfied) {
  Pipeline p(3);
  p.Seed();
  for (int i : {1, 2}) {
    ASSERT_TRUE(p.net_.SetLinkState(kEdge, p.peer_node(i), net::LinkState::kDown).ok());
  }
  TxReceipt r = p.InvokeAndWait("DroneObject", "update_drone_info",
                                Update("leader0", 1, "a"));
  EXPECT_EQ(r.error, "PolicyUnsatisfied");
  EXPECT_EQ(r.endorsements, 1);
  EXPECT_FALSE(r.flag.has_value());
}

TEST(PipelineTest, ContractErrorsSurfaceFromEndorsers) {
  Pipeline p(4);
  p.Seed();
  TxReceipt r = p.InvokeAndWait("DroneObject", "update_drone_info",
                                Update("ghost", 1, "a"));
  EXPECT_TRUE(absl::StartsWith(r.error, "UnknownDrone")) << r.error;
  EXPECT_FALSE(p.gw().Invoke("DroneObject", "query_drone", "{}").ok());
  EXPECT_FALSE(p.gw().Query("DroneObject", "update_drone_info", "{}", nullptr).ok());
}

TEST(PipelineTest, DivergentWriteSetsAreEndorsementMismatch) {
  LedgerLayout layout;
  layout.threshold = 3;
  Pipeline p(5, layout);
  p.Seed();
  p.SeverFromOrderers(2, net::LinkState::kDown);
  EXPECT_EQ(p.InvokeAndWait("DroneObject", "update_drone_info",
                            Update("leader0", 1, "a"))
                .flag,
            ValidityFlag::kValid);
  // peer2 missed that block, so its history differs.
  TxReceipt r = p.InvokeAndWait("DroneObject", "update_drone_info",
                                Update("leader0", 2, "b"));
  EXPECT_EQ(r.error, "EndorsementMismatch");
}

TEST(PipelineTest, StaleEndorsersLeadToVersionConflictAtCommit) {
  Pipeline p(6);
  p.Seed();
  p.SeverFromOrderers(0, net::LinkState::kDown);
  p.SeverFromOrderers(1, net::LinkState::kDown);
  // Only peer2 commits this one.
  const uint64_t first = p.Invoke("DroneObject", "update_drone_info",
                                  Update("leader0", 1, "a"));
  p.RunFor(SimTime::FromSeconds(4));
  EXPECT_EQ(p.peer(2).ledger().height(), p.peer(0).ledger().height() + 1);
  // peer0 and peer1 agree with each other on the old version and outvote
  // peer2; validation then finds the read stale.
  TxReceipt r = [&] {
    const uint64_t seq = p.Invoke("DroneObject", "update_drone_info",
                                  Update("leader0", 2, "b"));
    p.RunFor(SimTime::FromMillis(100));
    p.SeverFromOrderers(0, net::LinkState::kUp);
    p.SeverFromOrderers(1, net::LinkState::kUp);
    p.WaitFor(seq);
    return p.gw().receipts()[seq];
  }();
  EXPECT_EQ(r.endorsements, 2);
  EXPECT_EQ(r.flag, ValidityFlag::kInvalidVersionConflict);
  p.WaitFor(first);
  EXPECT_EQ(p.gw().receipts()[first].flag, ValidityFlag::kValid);
  p.RunFor(SimTime::FromSeconds(1));
  p.ExpectPeersIdentical();
  EXPECT_GT(p.peer(0).fetches() + p.peer(1).fetches(), 0u);
}

TEST(PipelineTest, ConcurrentConflictingInvokesOneValidOneConflict) {
  Pipeline p(7);
  p.Seed();
  const uint64_t a = p.Invoke("DroneObject", "update_drone_info",
                              Update("leader0", 1, "a"));
  const uint64_t b = p.Invoke("DroneObject", "update_drone_info",
                              Update("leader0", 2, "b"));
  p.WaitFor(a);
  p.WaitFor(b);
  std::multiset<ValidityFlag> flags = {*p.gw().receipts()[a].flag,
                                       *p.gw().receipts()[b].flag};
  EXPECT_EQ(flags, (std::multiset<ValidityFlag>{
                       ValidityFlag::kValid,
                       ValidityFlag::kInvalidVersionConflict}));
  const auto& chain = p.peer(0).ledger().blocks();
  EXPECT_EQ(ChainFlags(chain), SerialOracle(chain));
  p.ExpectPeersIdentical();
}

TEST(PipelineTest, ConflictRetryEventuallyCommits) {
  LedgerLayout layout;
  layout.gateway.conflict_retries = 2;
  Pipeline p(8, layout);
  p.Seed();
  std::vector<TxReceipt> done;
  for (int i = 0; i < 2; ++i) {
    ASSERT_TRUE(p.gw()
                    .Invoke("DroneObject", "update_drone_info",
                            Update("leader0", i, "d" + std::to_string(i)).dump(),
                            std::nullopt,
                            [&](const TxReceipt& r) { done.push_back(r); })
                    .ok());
  }
  p.RunFor(SimTime::FromSeconds(15));
  ASSERT_EQ(done.size(), 2u);
  for (const auto& r : done) EXPECT_EQ(r.flag, ValidityFlag::kValid);
  EXPECT_TRUE(std::any_of(done.begin(), done.end(),
                          [](const TxReceipt& r) { return r.attempt == 1; }));
  auto q = p.QueryAndWait("DroneObject", "query_drone", {{"drone_id", "leader0"}});
  EXPECT_EQ(DecodeDrone(*q)->history_refs.size(), 2u);
}

TEST(PipelineTest, ForgedEndorsementIsFlaggedAtValidation) {
  Pipeline p(9);
  p.Seed();
  // A client that fabricates endorsements instead of asking the peers.
  const NodeId forger{2};
  net::NodeInfo info;
  info.name = "forger";
  info.role = net::NodeRole::kEdgeSink;
  ASSERT_TRUE(p.net_.Attach(forger, info, {0, 0}).ok());
  for (NodeId o : p.orderer_nodes()) {
    ASSERT_TRUE(p.net_.AddLink(forger, o, net::LinkKind::kEdgeToEdge).ok());
  }
  ordering::Submitter sub(p.net_, forger, p.orderer_nodes());
  p.net_.SetReceiver(forger, [&](const net::Datagram& d) {
    if (d.tag == ordering::kTagSubmitReply) sub.OnReply(d);
  });

  ledger::Transaction tx;
  tx.creator = "edge";
  tx.contract = "DroneObject";
  tx.function = "update_drone_info";
  tx.args = Update("leader0", 7, "x").dump();
  tx.nonce = 999;
  tx.tx_id = ledger::ComputeTxId(tx);
  auto exec = Execute(p.peer(0).ledger().state(), tx.contract, tx.function, tx.args);
  ASSERT_TRUE(exec.ok());
  tx.read_set = exec->read_set;
  tx.write_set = exec->write_set;
  tx.response = exec->response;
  const std::string payload = ledger::EndorsementPayload(tx);
  // One genuine signature and one with a flipped bit.
  tx.endorsements.push_back(
      {"peer0", *p.peer(0).ledger().registry().Sign("peer0", payload)});
  ledger::Digest bad = *p.peer(0).ledger().registry().Sign("peer1", payload);
  bad[5] ^= 0x10;
  tx.endorsements.push_back({"peer1", bad});
  sub.Submit(tx);
  p.RunFor(SimTime::FromSeconds(4));

  const ledger::Block& tip = p.peer(0).ledger().tip();
  ASSERT_EQ(tip.txs.size(), 1u);
  EXPECT_EQ(tip.txs[0].tx_id, tx.tx_id);
  EXPECT_EQ(tip.flags[0], ValidityFlag::kInvalidEndorsement);
  auto q = p.QueryAndWait("DroneObject", "query_drone", {{"drone_id", "leader0"}});
  EXPECT_NE(DecodeDrone(*q)->location.x, 7);
  p.ExpectPeersIdentical();
}

TEST(PipelineTest, QueryNeverTouchesOrderersEvenWhenAllAreDown) {
  Pipeline p(10);
  p.Seed();
  p.InvokeAndWait("DroneObject", "update_drone_info", Update("leader0", 5, "a"));
  for (auto& o : p.dep_->orderers()) o->Crash();
  const size_t mark = p.net_.sends().size();
  auto q = p.QueryAndWait("DroneObject", "query_drone", {{"drone_id", "leader0"}});
  ASSERT_TRUE(q.ok());
  EXPECT_EQ(DecodeDrone(*q)->location.x, 5);
  const auto& sends = p.net_.sends();
  ASSERT_GT(sends.size(), mark);
  for (size_t i = mark; i < sends.size(); ++i) {
    const auto& o = p.orderer_nodes();
    EXPECT_EQ(std::count(o.begin(), o.end(), sends[i].dst), 0)
        << sends[i].tag << " went to an orderer";
  }
  EXPECT_EQ(p.peer(0).queries(), 1u);
}

TEST(PipelineTest, QueryFallsBackToNextPeerThenFails) {
  Pipeline p(11);
  p.Seed();
  ASSERT_TRUE(p.net_.SetLinkState(kEdge, p.peer_node(0), net::LinkState::kDown).ok());
  auto q = p.QueryAndWait("RescueTeam", "query_team", {{"team_id", "t2"}});
  ASSERT_TRUE(q.ok());
  EXPECT_EQ(DecodeTeam(*q)->location.x, 500);
  for (int i : {1, 2}) {
    ASSERT_TRUE(p.net_.SetLinkState(kEdge, p.peer_node(i), net::LinkState::kDown).ok());
  }
  auto none = p.QueryAndWait("RescueTeam", "query_team", {{"team_id", "t2"}});
  EXPECT_EQ(none.status().code(), absl::StatusCode::kUnavailable);
  EXPECT_EQ(none.status().message(), "PeerUnreachable");
  auto missing = [&] {
    EXPECT_TRUE(p.net_.SetLinkState(kEdge, p.peer_node(1), net::LinkState::kUp).ok());
    return p.QueryAndWait("RescueTeam", "query_team", {{"team_id", "nope"}});
  }();
  EXPECT_TRUE(absl::StartsWith(missing.status().message(), "UnknownTeam"));
}

TEST(PipelineTest, ConcurrentReportsNeverDoubleBookATeam) {
  LedgerLayout layout;
  layout.gateway.conflict_retries = 5;
  Pipeline p(12, layout);
  p.Seed();
  int finished = 0;
  for (int i = 0; i < 6; ++i) {
    Json r = Report("v" + std::to_string(i), 100.0 * i, 0,
                    i % 2 ? "urgent" : "normal");
    r["reported_us"] = i;
    ASSERT_TRUE(p.gw()
                    .Invoke("DroneObject", "report_victim", r.dump(), std::nullopt,
                            [&](const TxReceipt&) { ++finished; })
                    .ok());
  }
  p.RunFor(SimTime::FromSeconds(30));
  EXPECT_EQ(finished, 6);
  const auto& state = p.peer(0).ledger().state();
  std::map<std::string, int> open;
  int pending = 0;
  for (const auto& [key, v] : state.entries()) {
    if (!key.starts_with("victim/")) continue;
    VictimCase c = *DecodeCase(v.value);
    if (c.status == CaseStatus::kAssigned) ++open[*c.team];
    if (c.status == CaseStatus::kPending) ++pending;
  }
  EXPECT_EQ(open.size(), 3u);  // three teams
  for (const auto& [team, n] : open) EXPECT_EQ(n, 1) << team;
  EXPECT_EQ(pending, 3);
  const auto& chain = p.peer(0).ledger().blocks();
  EXPECT_EQ(ChainFlags(chain), SerialOracle(chain));
  p.ExpectPeersIdentical();
  // Every committed chain passes the offline audit.
  EXPECT_TRUE(ledger::VerifyChain(chain).ok);
}

}  // namespace
}  // namespace iod::txflow
