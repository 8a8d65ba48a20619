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

#include "iod/policy/offload.h"

#include <limits>
#include <string>
#include <tuple>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace iod::policy {

using device::AlgorithmId;
using device::PerFrameLatencyMs;

const char* ObjectiveName(Objective o) {
  switch (o) {
    case Objective::kMinimizeEnergy: return "minimize-energy";
    case Objective::kMinimizeLatency: return "minimize-latency";
    case Objective::kLexEnergyThenLatency: return "lex-energy-latency";
  }
  return "?";
}

const char* ConditionName(Condition c) {
  switch (c) {
    case Condition::kOnLinkDown: return "on_link_down";
    case Condition::kOnLowBattery: return "on_low_battery";
    case Condition::kOnStorageFull: return "on_storage_full";
  }
  return "?";
}

const char* ActionName(ActionKind a) {
  switch (a) {
    case ActionKind::kLocal: return "local";
    case ActionKind::kOffload: return "offload";
    case ActionKind::kStore: return "store";
    case ActionKind::kDrop: return "drop";
  }
  return "?";
}

std::optional<Objective> ParseObjective(const std::string& s) {
  for (Objective o : {Objective::kMinimizeEnergy, Objective::kMinimizeLatency,
                      Objective::kLexEnergyThenLatency}) {
    if (s == ObjectiveName(o)) return o;
  }
  return std::nullopt;
}

std::optional<Condition> ParseCondition(const std::string& s) {
  for (Condition c : {Condition::kOnLinkDown, Condition::kOnLowBattery,
                      Condition::kOnStorageFull}) {
    if (s == ConditionName(c)) return c;
  }
  return std::nullopt;
}

std::optional<ActionKind> ParseAction(const std::string& s) {
  for (ActionKind a : {ActionKind::kLocal, ActionKind::kStore, ActionKind::kDrop}) {
    if (s == ActionName(a)) return a;
  }
  return std::nullopt;
}

std::optional<AlgorithmId> SelectAlgorithm(
    const std::vector<AlgorithmId>& candidates, const PolicyConfig& cfg,
    const device::DeviceProfile& device, const device::PowerModeId& mode) {
  std::optional<AlgorithmId> best;
  std::tuple<double, double> best_key;
  for (const AlgorithmId& a : candidates) {
    auto e = device.Entry(a, mode);
    if (!e.ok()) continue;
    const double latency = 1000.0 / e->fps;
    if (e->accuracy < cfg.min_accuracy || latency > cfg.max_latency_ms) continue;
    // Maximize accuracy, then minimize latency; label breaks exact ties.
    const std::tuple<double, double> key{-e->accuracy, latency};
    if (!best || key < best_key || (key == best_key && a < *best)) {
      best = a;
      best_key = key;
    }
  }
  return best;
}

namespace {

// Highest accuracy regardless of constraints; what Local runs when a rule
// forces it and nothing meets the thresholds.
std::optional<AlgorithmId> FallbackAlgorithm(
    const std::vector<AlgorithmId>& candidates,
    const device::DeviceProfile& device, const device::PowerModeId& mode) {
  PolicyConfig relaxed;
  relaxed.min_accuracy = 0;
  relaxed.max_latency_ms = std::numeric_limits<double>::infinity();
  return SelectAlgorithm(candidates, relaxed, device, mode);
}

bool PreferOffload(const Prediction& p, Objective objective) {
  switch (objective) {
    case Objective::kMinimizeEnergy:
      if (p.offload_energy_mj != p.local_energy_mj) {
        return p.offload_energy_mj < p.local_energy_mj;
      }
      return p.offload_latency_ms < p.local_latency_ms;
    case Objective::kMinimizeLatency:
      if (p.offload_latency_ms != p.local_latency_ms) {
        return p.offload_latency_ms < p.local_latency_ms;
      }
      return p.offload_energy_mj < p.local_energy_mj;
    case Objective::kLexEnergyThenLatency:
      return std::tie(p.offload_energy_mj, p.offload_latency_ms) <
             std::tie(p.local_energy_mj, p.local_latency_ms);
  }
  return false;
}

}  // namespace

absl::StatusOr<Decision> Decide(const DecisionInput& in, const PolicyConfig& cfg) {
  if (in.small == nullptr || in.big.profile == nullptr || in.radio == nullptr) {
    return absl::InvalidArgumentError("decision input missing profile or radio");
  }
  std::vector<AlgorithmId> candidates = in.small_candidates;
  if (candidates.empty()) candidates = in.small->AlgorithmsFor(in.small_mode);
  auto fallback = FallbackAlgorithm(candidates, *in.small, in.small_mode);
  if (!fallback) {
    return absl::InvalidArgumentError("small drone has no usable algorithm");
  }
  auto big_latency =
      PerFrameLatencyMs(*in.big.profile, in.big.algorithm, in.big.mode);
  if (!big_latency.ok()) return big_latency.status();

  Decision d;
  const auto chosen = SelectAlgorithm(candidates, cfg, *in.small, in.small_mode);
  d.local_feasible = chosen.has_value();
  d.local_algorithm = chosen.value_or(*fallback);

  const net::RadioProfile& radio = *in.radio;
  d.predicted.local_latency_ms =
      *PerFrameLatencyMs(*in.small, d.local_algorithm, in.small_mode);
  d.predicted.local_energy_mj =
      *device::ProcessingEnergyMj(*in.small, d.local_algorithm, in.small_mode) +
      radio.tx_power_mw * radio.DatagramLatencyMs(cfg.result_datagram_bytes) /
          1000.0;
  d.predicted.offload_latency_ms = radio.frame.decision_ms + *big_latency;
  d.predicted.offload_energy_mj =
      radio.tx_power_mw * radio.frame.decision_ms / 1000.0;

  std::optional<ActionKind> action;
  for (const SpecificRule& r : cfg.specific_rules) {
    const bool fires = (r.when == Condition::kOnLinkDown && !in.link_up) ||
                       (r.when == Condition::kOnLowBattery && in.low_battery);
    if (fires) {
      action = r.action;
      d.by_rule = true;
      break;
    }
  }
  if (!action) {
    if (!in.link_up) {
      action = d.local_feasible ? ActionKind::kLocal : ActionKind::kStore;
    } else if (!d.local_feasible) {
      action = ActionKind::kOffload;
    } else {
      action = PreferOffload(d.predicted, cfg.objective) ? ActionKind::kOffload
                                                         : ActionKind::kLocal;
    }
  }
  if (*action == ActionKind::kStore && in.storage_full) {
    std::optional<ActionKind> escalated;
    for (const SpecificRule& r : cfg.specific_rules) {
      if (r.when == Condition::kOnStorageFull) {
        escalated = r.action;
        break;
      }
    }
    if (!escalated || *escalated == ActionKind::kStore) {
      return absl::FailedPreconditionError(
          "NoFeasibleAction: frame cannot be offloaded and storage is full");
    }
    action = escalated;
    d.by_rule = true;
  }
  d.action = *action;
  return d;
}

}  // namespace iod::policy
