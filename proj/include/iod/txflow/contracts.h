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

#ifndef IOD_TXFLOW_CONTRACTS_H_
#define IOD_TXFLOW_CONTRACTS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "iod/ledger/block.h"
#include "iod/ledger/world_state.h"
#include "iod/sim/time.h"

namespace iod::txflow {

enum class ContractId { kDroneObject, kRescueTeam, kHospital };

std::string_view ContractName(ContractId c);
std::optional<ContractId> ParseContract(std::string_view name);

// Request/response size classes carried as opaque attachments.
inline constexpr uint64_t kMiB = 1024 * 1024;
inline constexpr uint64_t kUpdateInfoBytes = 4 * kMiB;
inline constexpr uint64_t kUrgentInfoBytes = kMiB / 2;
inline constexpr uint64_t kQueryDroneBytes = 16 * kMiB;

struct FunctionSpec {
  ContractId contract;
  std::string_view name;
  bool read_only = false;
  // Default attachment on the request (invokes) or the reply (queries).
  uint64_t payload_bytes = 0;
};

/// NotFound ("UnknownFunction") unless `function` belongs to `contract`.
absl::StatusOr<const FunctionSpec*> LookupFunction(std::string_view contract,
                                                   std::string_view function);
const std::vector<FunctionSpec>& AllFunctions();

// ---- Records ---------------------------------------------------------------

struct DroneRecord {
  std::string drone_id;
  Vec2 location;
  double battery_fraction = 1.0;
  // Cluster membership: the leader and the drones it is linked to.
  int cluster = -1;
  std::vector<std::string> links;
  std::vector<std::string> history_refs;  // newest last, bounded

  bool operator==(const DroneRecord&) const = default;
};

/// Only the newest references are kept on the record.
inline constexpr size_t kMaxHistoryRefs = 32;

struct RescueTeamRecord {
  std::string team_id;
  Vec2 location;
  std::vector<std::string> specialists;
  bool available = true;
  std::optional<std::string> assigned_case;
  std::vector<std::string> archive_refs;

  bool operator==(const RescueTeamRecord&) const = default;
};

struct HospitalRecord {
  std::string hospital_id;
  Vec2 location;
  std::set<std::string> capabilities;

  bool operator==(const HospitalRecord&) const = default;
};

enum class Urgency { kNormal, kUrgent };
enum class CaseStatus { kPending, kAssigned, kClosed };

struct VictimCase {
  std::string case_id;
  std::string drone_id;
  Vec2 location;
  Urgency urgency = Urgency::kNormal;
  std::vector<std::string> required_specialists;
  std::set<std::string> required_capabilities;
  int64_t reported_us = 0;
  CaseStatus status = CaseStatus::kPending;
  std::optional<std::string> team;
  std::optional<std::string> hospital;
  bool no_hospital_match = false;

  bool operator==(const VictimCase&) const = default;
};

/// Canonical JSON text (sorted keys, no whitespace) for stored values.
std::string EncodeDrone(const DroneRecord& r);
std::string EncodeTeam(const RescueTeamRecord& r);
std::string EncodeHospital(const HospitalRecord& r);
std::string EncodeCase(const VictimCase& c);
absl::StatusOr<DroneRecord> DecodeDrone(std::string_view json);
absl::StatusOr<RescueTeamRecord> DecodeTeam(std::string_view json);
absl::StatusOr<HospitalRecord> DecodeHospital(std::string_view json);
absl::StatusOr<VictimCase> DecodeCase(std::string_view json);

std::string DroneKey(std::string_view id);
std::string TeamKey(std::string_view id);
std::string HospitalKey(std::string_view id);
std::string CaseKey(std::string_view id);
inline constexpr char kTeamIndexKey[] = "index/teams";
inline constexpr char kHospitalIndexKey[] = "index/hospitals";
inline constexpr char kPendingQueueKey[] = "queue/pending";

// ---- Selection rules ---------------------------------------------------------

/// Nearest available team holding every required specialist; equal
/// distances go to the lexicographically lower team id.
std::optional<std::string> SelectTeam(
    const std::vector<RescueTeamRecord>& teams, Vec2 at,
    const std::vector<std::string>& required);

/// Nearest hospital whose capabilities cover `required`; same tie rule.
std::optional<std::string> SelectHospital(
    const std::vector<HospitalRecord>& hospitals, Vec2 at,
    const std::set<std::string>& required);

/// Hospital needs assumed for an urgent case that names none.
inline constexpr char kDefaultUrgentCapability[] = "emergency_rooms";

// ---- Execution -----------------------------------------------------------------

/// Read/write tracking over committed state. Reads record the committed
/// version the first time a key is seen; a key already written in this
/// execution reads back the pending value.
class TxContext {
 public:
  explicit TxContext(const ledger::WorldState& state) : state_(state) {}

  std::optional<std::string> Get(const std::string& key);
  void Put(const std::string& key, std::string value);

  std::vector<ledger::ReadEntry> read_set() const;
  std::vector<ledger::WriteEntry> write_set() const;

 private:
  const ledger::WorldState& state_;
  std::map<std::string, std::optional<ledger::Version>> reads_;
  std::map<std::string, std::string> writes_;
};

struct ExecResult {
  std::string response;
  std::vector<ledger::ReadEntry> read_set;
  std::vector<ledger::WriteEntry> write_set;

  bool operator==(const ExecResult&) const = default;
};

/// Runs `contract.function(args)` against `state` without modifying it.
/// Args and response are canonical JSON. Deterministic: the same state and
/// input always give the same result.
absl::StatusOr<ExecResult> Execute(const ledger::WorldState& state,
                                   std::string_view contract,
                                   std::string_view function,
                                   std::string_view args);

}  // namespace iod::txflow

#endif  // IOD_TXFLOW_CONTRACTS_H_
