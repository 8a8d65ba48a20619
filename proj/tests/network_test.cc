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

#include <string>
#include <vector>

#include <gtest/gtest.h>
#include "iod/sim/kernel.h"

namespace iod::net {
namespace {

constexpr NodeId kSmall{1};
constexpr NodeId kSmall2{2};
constexpr NodeId kLeader{10};
constexpr NodeId kLeaderB{11};
constexpr NodeId kLeaderC{12};
constexpr NodeId kLeaderD{13};
constexpr NodeId kEdge{20};

class NetworkTest : public ::testing::Test {
 protected:
  NetworkTest() : kernel_(5), net_(kernel_) {
    net_.set_frame_jitter(false);
    Add(kSmall, "s1", NodeRole::kSmallDrone, 0, {0, 0}, 500);
    Add(kSmall2, "s2", NodeRole::kSmallDrone, 0, {10, 0}, 500);
    Add(kLeader, "l0", NodeRole::kLeader, 0, {100, 0}, 3000);
    Add(kLeaderB, "l1", NodeRole::kLeader, 1, {1100, 0}, 3000);
    Add(kLeaderC, "l2", NodeRole::kLeader, 2, {100, 1000}, 3000);
    Add(kLeaderD, "l3", NodeRole::kLeader, 3, {100, -1000}, 3000);
    Add(kEdge, "edge", NodeRole::kEdgeSink, -1, {0, 2000}, 5000);
    EXPECT_TRUE(net_.AddLink(kSmall, kLeader, LinkKind::kSmallToLeader).ok());
    EXPECT_TRUE(net_.AddLink(kSmall2, kLeader, LinkKind::kSmallToLeader).ok());
    EXPECT_TRUE(net_.AddLink(kLeader, kEdge, LinkKind::kLeaderToEdge).ok());
  }

  void Add(NodeId id, std::string name, NodeRole role, int cluster, Vec2 pos,
           double range) {
    NodeInfo info{name, role, cluster, DefaultWifiProfile(range)};
    ASSERT_TRUE(net_.Attach(id, info, pos, [this, id](const Datagram& d) {
                      received_.push_back({id, d.tag});
                    }).ok());
  }

  Datagram Dg(NodeId src, NodeId dst, size_t bytes, std::string tag = "m") {
    Datagram d;
    d.src = src;
    d.dst = dst;
    d.size_bytes = bytes;
    d.tag = std::move(tag);
    return d;
  }

  Kernel kernel_;
  Network net_;
  std::vector<std::pair<NodeId, std::string>> received_;
};

TEST_F(NetworkTest, DatagramLatencyReproducesMeasuredPoints) {
  auto a = net_.SendDatagram(Dg(kSmall, kLeader, 10000));
  auto b = net_.SendDatagram(Dg(kSmall, kLeader, 65508));
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_NEAR(a->latency_ms, 3.7, 1e-12);
  EXPECT_NEAR(b->latency_ms, 5.6, 1e-12);
}

TEST_F(NetworkTest, InterpolationOnFittedLine) {
  // Oracle: the line through (10000, 3.7) and (65508, 5.6), evaluated by
  // direct substitution rather than through intercept/slope.
  auto oracle = [](double s) {
    return 3.7 + (s - 10000.0) * (5.6 - 3.7) / (65508.0 - 10000.0);
  };
  const RadioProfile p = DefaultWifiProfile(100);
  EXPECT_NEAR(p.datagram_slope_ms_per_byte, 3.423e-5, 1e-8);
  EXPECT_NEAR(p.datagram_intercept_ms, 3.358, 1e-3);
  EXPECT_NEAR(p.DatagramLatencyMs(30000), 4.385, 1e-3);
  for (size_t s = 10000; s <= 65508; s += 997) {
    EXPECT_NEAR(p.DatagramLatencyMs(s), oracle(static_cast<double>(s)), 1e-9);
  }
}

TEST_F(NetworkTest, OversizeAndUnattached) {
  EXPECT_EQ(net_.SendDatagram(Dg(kSmall, kLeader, 65509)).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(net_.SendDatagram(Dg(kSmall, NodeId{99}, 10)).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST_F(NetworkTest, FrameUsesPlanningLatencyWithoutJitter) {
  auto r = net_.SendFrame(Dg(kSmall, kLeader, 2300000, "frame"));
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r->delivered);
  EXPECT_DOUBLE_EQ(r->latency_ms, 300);
  EXPECT_DOUBLE_EQ(r->tx_energy_mj, 975);
  EXPECT_EQ(r->deliver_at, SimTime::FromMillis(300));
  kernel_.RunUntilIdle();
  ASSERT_EQ(received_.size(), 1u);
  EXPECT_EQ(received_[0].first, kLeader);
}

TEST_F(NetworkTest, FrameJitterStaysInEnvelope) {
  net_.set_frame_jitter(true);
  for (int i = 0; i < 200; ++i) {
    auto r = net_.SendFrame(Dg(kSmall, kLeader, 2300000));
    ASSERT_TRUE(r.ok());
    EXPECT_GE(r->latency_ms, 200);
    EXPECT_LE(r->latency_ms, 300);
  }
}

TEST_F(NetworkTest, LinkDownFrameFailsWithoutEnergy) {
  ASSERT_TRUE(net_.SetLinkState(kSmall, kLeader, LinkState::kDown).ok());
  auto r = net_.SendFrame(Dg(kSmall, kLeader, 2300000));
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->delivered);
  EXPECT_EQ(r->reason, DropReason::kLinkDown);
  EXPECT_EQ(net_.tx_energy_mj(kSmall), 0);
  ASSERT_TRUE(net_.SetLinkState(kSmall, kLeader, LinkState::kUp).ok());
  EXPECT_TRUE(net_.SendFrame(Dg(kSmall, kLeader, 2300000))->delivered);
}

TEST_F(NetworkTest, UnknownLink) {
  EXPECT_EQ(net_.SetLinkState(kSmall, kEdge, LinkState::kDown).code(),
            absl::StatusCode::kNotFound);
}

TEST_F(NetworkTest, InFlightUnaffectedByLinkChange) {
  auto r = net_.SendFrame(Dg(kSmall, kLeader, 2300000));
  ASSERT_TRUE(r->delivered);
  ASSERT_TRUE(net_.SetLinkState(kSmall, kLeader, LinkState::kDown).ok());
  kernel_.RunUntilIdle();
  EXPECT_EQ(received_.size(), 1u);
}

TEST_F(NetworkTest, ScheduledFaultSplitsRunInTwoPhases) {
  ASSERT_TRUE(net_.ScheduleLinkState(SimTime::FromSeconds(10), kSmall, kLeader,
                                     LinkState::kDown).ok());
  std::vector<bool> delivered;
  for (int s = 0; s < 20; ++s) {
    kernel_.Schedule(SimTime::FromSeconds(s) + SimTime::FromMillis(500), kSmall,
                     "send", [&] {
                       delivered.push_back(
                           net_.SendDatagram(Dg(kSmall, kLeader, 100))->delivered);
                     }).IgnoreError();
  }
  kernel_.RunUntilIdle();
  ASSERT_EQ(delivered.size(), 20u);
  for (int s = 0; s < 20; ++s) EXPECT_EQ(delivered[s], s < 10) << s;
}

TEST_F(NetworkTest, RangeBoundaryIsClosed) {
  // s1 range 500, leader range 3000: effective range 500.
  net_.SetPosition(kSmall, {0, 0});
  net_.SetPosition(kLeader, {0, 0});
  EXPECT_TRUE(*net_.InRange(kSmall, kLeader));
  net_.SetPosition(kLeader, {300, 400});
  EXPECT_TRUE(*net_.InRange(kSmall, kLeader));
  net_.SetPosition(kLeader, {300, 401});
  EXPECT_FALSE(*net_.InRange(kSmall, kLeader));
  EXPECT_EQ(net_.InRange(kSmall, NodeId{77}).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST_F(NetworkTest, BoatBeyondLeaderRangeDropsLeaderEdgeSends) {
  // leader range 3000, edge 5000: effective 3000. Put edge at 3001 m.
  net_.SetPosition(kLeader, {0, 0});
  net_.SetPosition(kEdge, {3001, 0});
  auto r = net_.SendDatagram(Dg(kLeader, kEdge, 100));
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->delivered);
  EXPECT_EQ(r->reason, DropReason::kOutOfRange);
}

TEST_F(NetworkTest, SmallToSmallLinksRejected) {
  EXPECT_FALSE(net_.AddLink(kSmall, kSmall2, LinkKind::kSmallToLeader).ok());
  // Small drone and a leader of another cluster.
  EXPECT_FALSE(net_.AddLink(kSmall, kLeaderB, LinkKind::kSmallToLeader).ok());
  auto r = net_.SendDatagram(Dg(kSmall, kSmall2, 10));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->reason, DropReason::kNoLink);
}

TEST_F(NetworkTest, MulticastAdjacent) {
  // Isolated leader.
  auto none = net_.MulticastAdjacent(kLeader, Dg(kLeader, kLeader, 100));
  ASSERT_TRUE(none.ok());
  EXPECT_TRUE(none->empty());

  for (NodeId n : {kLeaderB, kLeaderC, kLeaderD}) {
    ASSERT_TRUE(net_.AddLink(kLeader, n, LinkKind::kLeaderToLeader).ok());
  }
  auto all = net_.MulticastAdjacent(kLeader, Dg(kLeader, kLeader, 100));
  ASSERT_TRUE(all.ok());
  EXPECT_EQ(all->size(), 3u);
  for (const auto& o : *all) EXPECT_TRUE(o.delivered);

  EXPECT_EQ(net_.MulticastAdjacent(kSmall, Dg(kSmall, kSmall, 1)).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST_F(NetworkTest, MulticastEnumeratesLinkStates) {
  ASSERT_TRUE(net_.AddLink(kLeader, kLeaderB, LinkKind::kLeaderToLeader).ok());
  ASSERT_TRUE(net_.AddLink(kLeader, kLeaderC, LinkKind::kLeaderToLeader).ok());
  // Enumerate every Up/Down combination of the two links.
  for (int mask = 0; mask < 4; ++mask) {
    const bool b_up = mask & 1, c_up = mask & 2;
    net_.SetLinkState(kLeader, kLeaderB, b_up ? LinkState::kUp : LinkState::kDown)
        .IgnoreError();
    net_.SetLinkState(kLeader, kLeaderC, c_up ? LinkState::kUp : LinkState::kDown)
        .IgnoreError();
    auto outs = net_.MulticastAdjacent(kLeader, Dg(kLeader, kLeader, 100));
    ASSERT_TRUE(outs.ok());
    ASSERT_EQ(outs->size(), 2u);
    EXPECT_EQ((*outs)[0].delivered, b_up);
    EXPECT_EQ((*outs)[1].delivered, c_up);
    const int delivered = (*outs)[0].delivered + (*outs)[1].delivered;
    EXPECT_EQ(delivered, b_up + c_up);
  }
}

TEST_F(NetworkTest, FifoPerLinkEvenWhenSizesDiffer) {
  ASSERT_TRUE(net_.SendDatagram(Dg(kSmall, kLeader, 65508, "big")).ok());
  ASSERT_TRUE(net_.SendDatagram(Dg(kSmall, kLeader, 10, "small")).ok());
  kernel_.RunUntilIdle();
  ASSERT_EQ(received_.size(), 2u);
  EXPECT_EQ(received_[0].second, "big");
  EXPECT_EQ(received_[1].second, "small");
}

TEST_F(NetworkTest, TxEnergyBooksBalance) {
  net_.set_frame_jitter(true);
  for (int i = 0; i < 50; ++i) {
    net_.SendFrame(Dg(kSmall, kLeader, 2300000)).IgnoreError();
    net_.SendDatagram(Dg(kSmall, kLeader, 100 + i * 1000)).IgnoreError();
    if (i == 25) net_.SetLinkState(kSmall, kLeader, LinkState::kDown).IgnoreError();
  }
  double expected = 0;
  for (const SendRecord& r : net_.sends()) {
    if (r.src == kSmall && r.delivered) {
      expected += 3250.0 * r.latency_ms / 1000.0;
      EXPECT_GT(r.latency_ms, 0);
    }
    if (!r.transmitted) EXPECT_EQ(r.tx_energy_mj, 0);
  }
  EXPECT_DOUBLE_EQ(net_.tx_energy_mj(kSmall), expected);
}

}  // namespace
}  // namespace iod::net
