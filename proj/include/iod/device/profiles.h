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

#ifndef IOD_DEVICE_PROFILES_H_
#define IOD_DEVICE_PROFILES_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace iod::device {

/// Detection algorithms are identified by label so scenario files can add
/// custom entries alongside the built-in ones.
using AlgorithmId = std::string;
using PowerModeId = std::string;

inline constexpr char kHaarCascades[] = "haar-cascades";
inline constexpr char kHog[] = "hog";
inline constexpr char kYoloV3Tiny[] = "yolov3-tiny";
inline constexpr char kYoloV4Tiny[] = "yolov4-tiny";
inline constexpr char kYoloV4[] = "yolov4";

struct PowerMode {
  PowerModeId id;
  double budget_w = 0;  // 0 when the vendor does not name a budget
  int cpu_cores = 1;
};

struct AlgorithmEntry {
  double fps = 0;
  double active_power_mw = 0;
  double accuracy = 0;
  double false_positive_rate = 0.02;
};

/// A compute board: idle draw, power modes and per-(algorithm, mode)
/// throughput/power/accuracy.
struct DeviceProfile {
  std::string board_name;
  double idle_power_mw = 0;
  std::vector<PowerMode> modes;
  PowerModeId default_mode;
  std::map<std::pair<AlgorithmId, PowerModeId>, AlgorithmEntry> entries;

  absl::Status Validate() const;
  bool HasMode(const PowerModeId& mode) const;
  /// NotFound ("NoEntry") when the pair is absent.
  absl::StatusOr<AlgorithmEntry> Entry(const AlgorithmId& algo,
                                       const PowerModeId& mode) const;
  /// Algorithms with an entry for `mode`, in label order.
  std::vector<AlgorithmId> AlgorithmsFor(const PowerModeId& mode) const;
};

/// 1000 / fps.
absl::StatusOr<double> PerFrameLatencyMs(const DeviceProfile& p,
                                         const AlgorithmId& algo,
                                         const PowerModeId& mode);

/// active_power_mw * per_frame_latency_ms / 1000.
absl::StatusOr<double> ProcessingEnergyMj(const DeviceProfile& p,
                                          const AlgorithmId& algo,
                                          const PowerModeId& mode);

/// Board, battery and airframe numbers for one class of node.
struct NodeClass {
  DeviceProfile board;
  double battery_capacity_mj = 0;  // +inf for mains-powered nodes
  double hover_power_w = 0;
  double speed_mps = 0;
};

struct DefaultProfiles {
  NodeClass small_drone;
  NodeClass big_drone;
  NodeClass edge;
};

/// Built-in profiles mirroring the measured board tables.
DefaultProfiles MakeDefaultProfiles();

// Numbers behind the defaults, exposed for tests and reports.
inline constexpr double kIntelUpIdleMw = 3100;
inline constexpr double kJetsonIdleMw = 4655;
inline constexpr double kSmallBatteryMah = 5500;
inline constexpr double kSmallBatteryVolts = 14.8;
inline constexpr double kBigHoverW = 1500;
inline constexpr double kBigEnduranceS = 20 * 60;
inline constexpr double kSmallHoverW = 300;
inline constexpr char kIntelUpMode[] = "nominal";
inline constexpr char kJetson10W2Core[] = "10W-2core";
inline constexpr char kJetson10W4Core[] = "10W-4core";
inline constexpr char kJetson15W4Core[] = "15W-4core";
inline constexpr char kJetson15W6Core[] = "15W-6core";

}  // namespace iod::device

#endif  // IOD_DEVICE_PROFILES_H_
