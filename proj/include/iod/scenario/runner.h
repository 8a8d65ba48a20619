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

#ifndef IOD_SCENARIO_RUNNER_H_
#define IOD_SCENARIO_RUNNER_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "iod/fleet/mission.h"
#include "iod/net/network.h"
#include "iod/ordering/trace.h"
#include "iod/scenario/report.h"
#include "iod/scenario/scenario.h"
#include "iod/sim/kernel.h"
#include "iod/txflow/deployment.h"
#include "json.hpp"

namespace iod::scenario {

struct RunOptions {
  // Replaces the scenario's seed.
  std::optional<uint64_t> seed;
  // Hard stop in simulated seconds. By default the run ends once the fleet
  // is home and the ledger has drained, or settle_s after the fleet is home.
  std::optional<double> until_s;
};

/// One run: kernel, network, fleet and ledger wired from a scenario.
class Simulation {
 public:
  static absl::StatusOr<std::unique_ptr<Simulation>> Build(const Scenario& s,
                                                           const RunOptions& opts = {});

  absl::Status Run();

  const Scenario& scenario() const { return scenario_; }
  uint64_t seed() const { return seed_; }
  Kernel& kernel() { return *kernel_; }
  const Kernel& kernel() const { return *kernel_; }
  net::Network& net() { return *net_; }
  const net::Network& net() const { return *net_; }
  fleet::Mission& mission() { return *mission_; }
  const fleet::Mission& mission() const { return *mission_; }
  // Null when the scenario has no ledger.
  txflow::LedgerDeployment* ledger() { return ledger_.get(); }
  const txflow::LedgerDeployment* ledger() const { return ledger_.get(); }
  const txflow::Gateway* edge_gateway() const;
  const ordering::RaftTrace& raft_trace() const { return raft_trace_; }

  /// When the fleet was all home (or lost) after the mission end.
  std::optional<SimTime> fleet_home_at() const { return fleet_home_at_; }
  /// Every invoke finished and all peers at the same height.
  bool LedgerSettled() const;
  /// The committed chain as the first peer holds it.
  std::vector<ledger::Block> Chain() const;

  std::string NameOf(NodeId id) const;

 private:
  Simulation() = default;

  Scenario scenario_;
  uint64_t seed_ = 0;
  RunOptions opts_;
  std::unique_ptr<Kernel> kernel_;
  std::unique_ptr<net::Network> net_;
  ordering::RaftTrace raft_trace_;
  std::unique_ptr<fleet::Mission> mission_;
  std::unique_ptr<txflow::LedgerDeployment> ledger_;
  std::optional<SimTime> fleet_home_at_;
};

/// The run's event trace in time order. Summary rows (victims, energy,
/// blocks) are stamped with the end time.
std::vector<TraceEvent> CollectEvents(const Simulation& sim);

struct InvariantResult {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct InvariantReport {
  std::vector<InvariantResult> checks;

  bool ok() const;
  nlohmann::json ToJson() const;
};

/// Cross-checks a finished run: energy books, urgent delivery and
/// duplicates, sync ordering, ledger matches, chain validity, peer
/// agreement and Raft safety.
InvariantReport CheckInvariants(const Simulation& sim);

/// Everything a run leaves behind, as bytes.
struct RunArtifacts {
  MetricsReport metrics;
  InvariantReport invariants;
  std::string report_json;
  std::string report_csv;
  std::string events_csv;
  std::string kernel_trace_csv;
  std::string raft_jsonl;
  std::string ledger_export;
  std::string ledger_index_json;
  std::string scenario_toml;
};

absl::StatusOr<RunArtifacts> MakeArtifacts(const Simulation& sim);

/// Writes report.json (plus report.csv for "csv"), events.csv, kernel_trace.csv,
/// raft.jsonl, ledger.bin, ledger.bin.index.json and scenario.toml.
absl::Status WriteArtifacts(const RunArtifacts& a, const std::string& dir,
                            const std::string& format);

}  // namespace iod::scenario

#endif  // IOD_SCENARIO_RUNNER_H_
