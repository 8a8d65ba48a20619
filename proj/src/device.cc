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
#include <limits>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "iod/device/battery.h"
#include "iod/device/profiles.h"

namespace iod::device {

absl::Status DeviceProfile::Validate() const {
  int defaults = 0;
  for (const PowerMode& m : modes) {
    if (m.cpu_cores <= 0) {
      return absl::InvalidArgumentError(
          absl::StrCat(board_name, ": mode ", m.id, " has no cores"));
    }
    if (m.id == default_mode) ++defaults;
  }
  if (defaults != 1) {
    return absl::InvalidArgumentError(
        absl::StrCat(board_name, ": default mode '", default_mode,
                     "' must name exactly one mode"));
  }
  for (const auto& [key, e] : entries) {
    if (!HasMode(key.second)) {
      return absl::InvalidArgumentError(absl::StrCat(
          board_name, ": entry ", key.first, " uses unknown mode ", key.second));
    }
    if (!(e.fps > 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat(board_name, ": ", key.first, " fps must be > 0"));
    }
    if (e.active_power_mw < idle_power_mw) {
      return absl::InvalidArgumentError(absl::StrCat(
          board_name, ": ", key.first, " active power below idle power"));
    }
    if (e.accuracy < 0 || e.accuracy > 1 || e.false_positive_rate < 0 ||
        e.false_positive_rate > 1) {
      return absl::InvalidArgumentError(absl::StrCat(
          board_name, ": ", key.first, " probabilities must be in [0,1]"));
    }
  }
  return absl::OkStatus();
}

bool DeviceProfile::HasMode(const PowerModeId& mode) const {
  return std::any_of(modes.begin(), modes.end(),
                     [&](const PowerMode& m) { return m.id == mode; });
}

absl::StatusOr<AlgorithmEntry> DeviceProfile::Entry(
    const AlgorithmId& algo, const PowerModeId& mode) const {
  auto it = entries.find({algo, mode});
  if (it == entries.end()) {
    return absl::NotFoundError(
        absl::StrCat("NoEntry: ", board_name, " ", algo, " @ ", mode));
  }
  return it->second;
}

std::vector<AlgorithmId> DeviceProfile::AlgorithmsFor(
    const PowerModeId& mode) const {
  std::vector<AlgorithmId> out;
  for (const auto& [key, e] : entries) {
    if (key.second == mode) out.push_back(key.first);
  }
  return out;
}

absl::StatusOr<double> PerFrameLatencyMs(const DeviceProfile& p,
                                         const AlgorithmId& algo,
                                         const PowerModeId& mode) {
  auto e = p.Entry(algo, mode);
  if (!e.ok()) return e.status();
  return 1000.0 / e->fps;
}

absl::StatusOr<double> ProcessingEnergyMj(const DeviceProfile& p,
                                          const AlgorithmId& algo,
                                          const PowerModeId& mode) {
  auto e = p.Entry(algo, mode);
  if (!e.ok()) return e.status();
  return e->active_power_mw * (1000.0 / e->fps) / 1000.0;
}

DefaultProfiles MakeDefaultProfiles() {
  DefaultProfiles d;

  // Intel UP Squared on the small drone. Single power mode.
  DeviceProfile& up = d.small_drone.board;
  up.board_name = "intel-up-squared";
  up.idle_power_mw = kIntelUpIdleMw;
  up.modes = {{kIntelUpMode, 0, 4}};
  up.default_mode = kIntelUpMode;
  up.entries[{kHaarCascades, kIntelUpMode}] = {3.7, 7710, 0.55};
  up.entries[{kHog, kIntelUpMode}] = {3.3, 7790, 0.65};
  up.entries[{kYoloV3Tiny, kIntelUpMode}] = {1.4, 7840, 0.80};
  d.small_drone.battery_capacity_mj =
      kSmallBatteryMah / 1000.0 * kSmallBatteryVolts * 3600.0 * 1000.0;
  d.small_drone.hover_power_w = kSmallHoverW;
  d.small_drone.speed_mps = 10;

  // Jetson Xavier NX on the big drone. Power was measured for YOLOv3-tiny
  // only; the other detectors reuse the same per-mode draw.
  DeviceProfile& nx = d.big_drone.board;
  nx.board_name = "jetson-xavier-nx";
  nx.idle_power_mw = kJetsonIdleMw;
  nx.modes = {{kJetson10W2Core, 10, 2},
              {kJetson10W4Core, 10, 4},
              {kJetson15W4Core, 15, 4},
              {kJetson15W6Core, 15, 6}};
  nx.default_mode = kJetson10W4Core;
  constexpr double kP10W4 = 13110;
  constexpr double kP15W6 = 18620;
  constexpr double kP15W4 = (kP10W4 + kP15W6) / 2;  // unmeasured
  nx.entries[{kYoloV3Tiny, kJetson10W4Core}] = {53.2, kP10W4, 0.80};
  nx.entries[{kYoloV3Tiny, kJetson15W4Core}] = {61.8, kP15W4, 0.80};
  nx.entries[{kYoloV3Tiny, kJetson15W6Core}] = {67.8, kP15W6, 0.80};
  nx.entries[{kYoloV4Tiny, kJetson10W4Core}] = {48.3, kP10W4, 0.85};
  nx.entries[{kYoloV4Tiny, kJetson15W4Core}] = {57.5, kP15W4, 0.85};
  nx.entries[{kYoloV4Tiny, kJetson15W6Core}] = {61.3, kP15W6, 0.85};
  nx.entries[{kYoloV4, kJetson10W4Core}] = {4.7, kP10W4, 0.92};
  nx.entries[{kYoloV4, kJetson15W4Core}] = {4.7, kP15W4, 0.92};
  nx.entries[{kYoloV4, kJetson15W6Core}] = {4.7, kP15W6, 0.92};
  d.big_drone.hover_power_w = kBigHoverW;
  d.big_drone.battery_capacity_mj = kBigHoverW * kBigEnduranceS * 1000.0;
  d.big_drone.speed_mps = 15;

  DeviceProfile& edge = d.edge.board;
  edge.board_name = "edge-server";
  edge.modes = {{"mains", 0, 16}};
  edge.default_mode = "mains";
  d.edge.battery_capacity_mj = std::numeric_limits<double>::infinity();
  return d;
}

Battery::Battery(double capacity_mj, double low_threshold_fraction)
    : capacity_mj_(capacity_mj),
      remaining_mj_(capacity_mj),
      low_threshold_(low_threshold_fraction) {}

bool Battery::unlimited() const { return std::isinf(capacity_mj_); }

double Battery::fraction() const {
  if (unlimited()) return 1.0;
  if (capacity_mj_ <= 0) return 0.0;
  return remaining_mj_ / capacity_mj_;
}

DrainResult Battery::Drain(double energy_mj) {
  DrainResult r;
  if (!(energy_mj > 0)) return r;
  if (unlimited()) {
    r.drawn_mj = energy_mj;
    return r;
  }
  const bool was_depleted = remaining_mj_ <= 0;
  r.drawn_mj = std::min(energy_mj, remaining_mj_);
  remaining_mj_ -= r.drawn_mj;
  if (remaining_mj_ < 0) remaining_mj_ = 0;
  if (!low_signaled_ && remaining_mj_ <= low_threshold_ * capacity_mj_) {
    low_signaled_ = true;
    r.crossed_low = true;
  }
  r.depleted = !was_depleted && remaining_mj_ <= 0;
  return r;
}

void Battery::Reset() {
  remaining_mj_ = capacity_mj_;
  low_signaled_ = false;
}

absl::StatusOr<double> EnduranceSeconds(const Battery& b, double steady_power_w) {
  if (!(steady_power_w > 0)) {
    return absl::InvalidArgumentError("NonPositivePower");
  }
  if (b.unlimited()) return std::numeric_limits<double>::infinity();
  return b.remaining_mj() / (steady_power_w * 1000.0);
}

}  // namespace iod::device
