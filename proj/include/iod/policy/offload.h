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

#ifndef IOD_POLICY_OFFLOAD_H_
#define IOD_POLICY_OFFLOAD_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "iod/device/profiles.h"
#include "iod/net/network.h"

namespace iod::policy {

enum class Objective { kMinimizeEnergy, kMinimizeLatency, kLexEnergyThenLatency };
enum class Condition { kOnLinkDown, kOnLowBattery, kOnStorageFull };
enum class ActionKind { kLocal, kOffload, kStore, kDrop };

const char* ObjectiveName(Objective o);
const char* ConditionName(Condition c);
const char* ActionName(ActionKind a);
std::optional<Objective> ParseObjective(const std::string& s);
std::optional<Condition> ParseCondition(const std::string& s);
std::optional<ActionKind> ParseAction(const std::string& s);

/// Condition -> action override evaluated before the cost comparison.
/// Only local, store and drop are valid rule actions.
struct SpecificRule {
  Condition when;
  ActionKind action;

  bool operator==(const SpecificRule&) const = default;
};

struct PolicyConfig {
  Objective objective = Objective::kLexEnergyThenLatency;
  double min_accuracy = 0.90;
  double max_latency_ms = 500;
  std::vector<SpecificRule> specific_rules = {
      {Condition::kOnLinkDown, ActionKind::kStore},
      {Condition::kOnStorageFull, ActionKind::kLocal},
  };
  /// Detection summary sent to the leader after local processing.
  size_t result_datagram_bytes = 10000;

  bool operator==(const PolicyConfig&) const = default;
};

/// A board running in a given mode with a chosen detector.
struct BoardSetting {
  const device::DeviceProfile* profile = nullptr;
  device::PowerModeId mode;
  device::AlgorithmId algorithm;
};

struct Prediction {
  double local_latency_ms = 0;
  double offload_latency_ms = 0;
  double local_energy_mj = 0;
  double offload_energy_mj = 0;
};

struct Decision {
  ActionKind action = ActionKind::kOffload;
  device::AlgorithmId local_algorithm;  // detector behind the local prediction
  bool local_feasible = false;
  bool by_rule = false;
  Prediction predicted;
};

/// Everything decide() needs to know about the small drone's situation.
struct DecisionInput {
  const device::DeviceProfile* small = nullptr;
  device::PowerModeId small_mode;
  std::vector<device::AlgorithmId> small_candidates;  // empty = all in mode
  BoardSetting big;
  const net::RadioProfile* radio = nullptr;  // small drone's radio
  bool link_up = true;
  bool low_battery = false;
  bool storage_full = false;
};

/// Highest-accuracy candidate with accuracy >= min_accuracy and per-frame
/// latency <= max_latency_ms; ties go to lower latency, then label.
std::optional<device::AlgorithmId> SelectAlgorithm(
    const std::vector<device::AlgorithmId>& candidates, const PolicyConfig& cfg,
    const device::DeviceProfile& device, const device::PowerModeId& mode);

/// Local / offload / store verdict for one captured frame.
///
/// Specific rules fire first; otherwise the local branch (best feasible small
/// drone detector, processing energy plus result-datagram tx energy) is
/// compared with the offload branch (planning frame latency plus the big
/// drone's per-frame latency; frame tx energy) under cfg.objective.
/// FailedPrecondition ("NoFeasibleAction") when only Store remains and local
/// storage is full.
absl::StatusOr<Decision> Decide(const DecisionInput& in, const PolicyConfig& cfg);

}  // namespace iod::policy

#endif  // IOD_POLICY_OFFLOAD_H_
