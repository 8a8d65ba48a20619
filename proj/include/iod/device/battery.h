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

#ifndef IOD_DEVICE_BATTERY_H_
#define IOD_DEVICE_BATTERY_H_

#include "absl/status/statusor.h"

namespace iod::device {

/// What happened during one Drain call.
struct DrainResult {
  double drawn_mj = 0;       // energy actually removed (clamped at empty)
  bool crossed_low = false;  // first crossing of the low threshold
  bool depleted = false;     // reached zero during this call
};

class Battery {
 public:
  Battery() = default;
  explicit Battery(double capacity_mj, double low_threshold_fraction = 0.2);

  double capacity_mj() const { return capacity_mj_; }
  double remaining_mj() const { return remaining_mj_; }
  double low_threshold_fraction() const { return low_threshold_; }
  double fraction() const;
  bool unlimited() const;
  bool depleted() const { return remaining_mj_ <= 0 && !unlimited(); }
  bool low_signaled() const { return low_signaled_; }

  /// remaining' = max(0, remaining - energy). Negative energy is treated as 0.
  DrainResult Drain(double energy_mj);
  /// Battery swap at the boat: full charge, low signal re-armed.
  void Reset();

 private:
  double capacity_mj_ = 0;
  double remaining_mj_ = 0;
  double low_threshold_ = 0.2;
  bool low_signaled_ = false;
};

/// remaining / (steady_power_w * 1000) seconds; +inf for unlimited batteries.
/// InvalidArgument ("NonPositivePower") when steady_power_w <= 0.
absl::StatusOr<double> EnduranceSeconds(const Battery& b, double steady_power_w);

}  // namespace iod::device

#endif  // IOD_DEVICE_BATTERY_H_
