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

#ifndef IOD_SCENARIO_REPORT_H_
#define IOD_SCENARIO_REPORT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "iod/scenario/scenario.h"
#include "json.hpp"

namespace iod::scenario {

/// One row of the event trace. The meaning of the generic columns depends
/// on `kind`; see EventsToCsv for the column order.
struct TraceEvent {
  int64_t t_us = 0;
  std::string kind;
  std::string node;
  uint64_t id = 0;
  std::string label;
  std::string detail;
  int64_t v1 = 0;
  int64_t v2 = 0;
  int64_t v3 = 0;

  bool operator==(const TraceEvent&) const = default;
};

inline constexpr char kEventsCsvHeader[] = "t_us,kind,node,id,label,detail,v1,v2,v3";

std::string EventsToCsv(const std::vector<TraceEvent>& events);
/// InvalidArgument naming the line for a malformed row.
absl::StatusOr<std::vector<TraceEvent>> EventsFromCsv(std::string_view csv);

/// Count, sum and maximum of a latency, in microseconds.
struct LatencyStat {
  int64_t count = 0;
  int64_t sum_us = 0;
  int64_t max_us = 0;

  void Add(int64_t us);
  double mean_ms() const { return count ? sum_us / 1000.0 / count : 0; }
};

struct VictimMetrics {
  int victim = 0;
  std::optional<int64_t> discovered_us;
  std::optional<int64_t> reported_us;
};

struct EnergyMetrics {
  std::string node;
  std::map<std::string, int64_t> by_kind_uj;
  int64_t drop_uj = 0;
  int64_t sorties = 0;
};

/// Ledger traffic of one contract function.
struct RequestClass {
  std::string function;
  bool query = false;
  int64_t count = 0;
  int64_t completed = 0;
  LatencyStat latency;
  int64_t payload_bytes = 0;
};

struct SendClass {
  std::string tag;
  int64_t count = 0;
  int64_t delivered = 0;
  int64_t bytes = 0;
  LatencyStat latency;
  int64_t tx_energy_uj = 0;
};

/// Aggregates of one run. Everything here is computed from the event trace.
struct MetricsReport {
  std::string scenario;
  uint64_t seed = 0;
  int64_t end_us = 0;
  int64_t kernel_events = 0;
  std::string kernel_digest;

  std::vector<VictimMetrics> victims;
  std::vector<EnergyMetrics> energy;
  std::map<std::string, int64_t> decisions;
  int64_t frames_sent = 0;
  std::map<std::string, int64_t> detections;  // "<stage>/<pos|neg>"
  int64_t false_positives = 0;
  int64_t urgent = 0;
  int64_t urgent_delivered = 0;
  std::map<std::string, int64_t> urgent_routes;
  LatencyStat urgent_latency;
  std::map<std::string, int64_t> edge_bytes;  // by arrival kind
  std::map<std::string, int64_t> edge_messages;
  int64_t edge_duplicates = 0;
  std::map<std::string, int64_t> relays;
  std::map<std::string, int64_t> returns;
  int64_t depleted_en_route = 0;
  int64_t blocks = 0;
  int64_t chain_txs = 0;
  std::map<std::string, int64_t> validity;
  std::vector<RequestClass> requests;
  LatencyStat commit_latency;
  std::map<std::string, int64_t> raft;  // by trace kind
  int64_t raft_max_term = 0;
  std::vector<SendClass> sends;

  nlohmann::json ToJson() const;
};

MetricsReport Aggregate(const std::vector<TraceEvent>& events);

/// Numbers that follow from the scenario alone: offload predictions per
/// detector, the datagram latency line and the planned sweep coverage.
absl::StatusOr<nlohmann::json> ModelTables(const Scenario& s);

/// Renders the named tables ("offload", "link", "ledger") from a report
/// document holding "metrics" and "model".
absl::StatusOr<std::string> RenderTables(const nlohmann::json& report,
                                         const std::vector<std::string>& which);

/// Flat "key,value" lines of a JSON document, for --format csv.
std::string FlattenCsv(const nlohmann::json& doc);

}  // namespace iod::scenario

#endif  // IOD_SCENARIO_REPORT_H_
