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

#ifndef IOD_SCENARIO_SCENARIO_H_
#define IOD_SCENARIO_SCENARIO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "iod/device/profiles.h"
#include "iod/fleet/mission.h"
#include "iod/fleet/sweep.h"
#include "iod/policy/offload.h"
#include "iod/sim/random.h"
#include "iod/txflow/contracts.h"

namespace iod::scenario {

struct ClusterSpec {
  fleet::Rect sub_area;
  int small_drones = 4;
  std::optional<Vec2> leader_station;
  std::string leader_mode = device::kJetson10W4Core;
  std::string leader_algorithm = device::kYoloV3Tiny;
  std::string small_mode = device::kIntelUpMode;
  std::vector<std::string> small_candidates;

  bool operator==(const ClusterSpec&) const = default;
};

struct LinkSpec {
  double small_range_m = 1000;
  double leader_range_m = 1000;
  double small_loss = 0;
  double leader_loss = 0;
  double datagram_jitter_ms = 0;
  bool frame_jitter = true;

  bool operator==(const LinkSpec&) const = default;
};

/// A link between two named nodes changes state at `at_s`.
struct FaultSpec {
  double at_s = 0;
  std::string a;
  std::string b;
  bool up = false;

  bool operator==(const FaultSpec&) const = default;
};

/// Overrides on top of the built-in node classes.
struct NodeClassSpec {
  std::optional<double> battery_capacity_mj;
  std::optional<double> hover_power_w;
  std::optional<double> speed_mps;

  bool operator==(const NodeClassSpec&) const = default;
};

/// Adds or replaces one (algorithm, mode) row on a board.
struct AlgorithmSpec {
  std::string board;  // "small" or "big"
  std::string algorithm;
  std::string mode;
  device::AlgorithmEntry entry;

  bool operator==(const AlgorithmSpec& o) const {
    return board == o.board && algorithm == o.algorithm && mode == o.mode &&
           entry.fps == o.entry.fps &&
           entry.active_power_mw == o.entry.active_power_mw &&
           entry.accuracy == o.entry.accuracy &&
           entry.false_positive_rate == o.entry.false_positive_rate;
  }
};

struct MissionParams {
  double capture_period_s = 1;
  double turnaround_s = 120;
  double status_period_s = 60;
  double relay_window_ms = 50;
  double verify_boost = 0.10;
  double verify_cap = 0.99;
  double verify_standoff_m = 100;
  double urgent_fraction = 0.5;
  int64_t frame_bytes = 2'300'000;
  int64_t control_bytes = 512;

  bool operator==(const MissionParams&) const = default;
};

struct LedgerSpec {
  bool enabled = true;
  int orderers = 3;
  int peers = 3;
  int threshold = 2;
  double batch_timeout_s = 2;
  int64_t batch_max_messages = 10;
  int64_t batch_max_bytes = 99ll * 1024 * 1024;
  int conflict_retries = 5;
  // After the fleet is home, how long the ledger may take to drain.
  double settle_s = 60;

  bool operator==(const LedgerSpec&) const = default;
};

/// Declarative description of one mission.
struct Scenario {
  std::string name = "scenario";
  uint64_t seed = 1;
  double duration_s = 600;
  fleet::Rect area;
  Vec2 boat;
  std::vector<ClusterSpec> clusters;
  std::vector<Vec2> gateways;
  std::vector<Vec2> victims;
  // Extra victims drawn uniformly over the area from the run seed.
  int random_victims = 0;
  LinkSpec links;
  std::vector<FaultSpec> faults;
  policy::PolicyConfig policy;
  MissionParams mission;
  NodeClassSpec small_drone;
  NodeClassSpec big_drone;
  std::vector<AlgorithmSpec> algorithms;
  LedgerSpec ledger;
  std::vector<txflow::RescueTeamRecord> teams;
  std::vector<txflow::HospitalRecord> hospitals;

  bool operator==(const Scenario&) const = default;
};

/// Reads scenario text. Malformed text gives "ParseError(line N): ...";
/// unknown keys, wrong types and broken references give
/// "SchemaViolation: ..." naming the key. Both are InvalidArgument.
absl::StatusOr<Scenario> ParseScenario(std::string_view text);

/// Reads a file, or a bundled scenario when `path_or_name` is not a file
/// but names one.
absl::StatusOr<Scenario> LoadScenario(const std::string& path_or_name);

/// Canonical text; ParseScenario(SaveScenario(s)) == s.
std::string SaveScenario(const Scenario& s);

/// Structural checks: counts >= 1, sub-areas inside the area, referenced
/// modes and algorithms present, fault endpoints naming real nodes.
absl::Status Validate(const Scenario& s);

/// Every node name a run will attach: the edge, the fleet in id order, then
/// orderers and peers when the ledger is enabled.
std::vector<std::string> NodeNames(const Scenario& s);

std::vector<std::string> BundledScenarioNames();
absl::StatusOr<std::string> BundledScenarioText(std::string_view name);

/// Profiles with the scenario's overrides applied.
absl::StatusOr<device::DefaultProfiles> ResolveProfiles(const Scenario& s);

/// Mission configuration for one run. Random victims come from `rng`.
absl::StatusOr<fleet::MissionConfig> ToMissionConfig(const Scenario& s,
                                                     RandomStream& rng);

}  // namespace iod::scenario

#endif  // IOD_SCENARIO_SCENARIO_H_
