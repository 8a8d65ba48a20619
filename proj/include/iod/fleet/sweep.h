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

#ifndef IOD_FLEET_SWEEP_H_
#define IOD_FLEET_SWEEP_H_

#include <vector>

#include "absl/status/statusor.h"
#include "iod/sim/time.h"

namespace iod::fleet {

/// Axis-aligned ground rectangle, closed on all sides.
struct Rect {
  Vec2 lo;
  Vec2 hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {(lo.x + hi.x) / 2, (lo.y + hi.y) / 2}; }
  bool Contains(Vec2 p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  bool Contains(const Rect& r) const { return Contains(r.lo) && Contains(r.hi); }
  bool operator==(const Rect&) const = default;
};

/// Intersection; empty rectangles come back with zero area.
Rect Intersect(const Rect& a, const Rect& b);

/// Nadir camera: the ground footprint grows with altitude.
struct CameraModel {
  double altitude_m = 40;
  double hfov_deg = 60;
  double vfov_deg = 45;

  /// Width (x) and height (y) of the ground footprint.
  Vec2 FootprintSize() const;
  bool operator==(const CameraModel&) const = default;
};

Rect FootprintAt(Vec2 center, Vec2 size);

/// Splits `area` into `n` equal strips along x.
std::vector<Rect> SplitStrips(const Rect& area, int n);

/// Lawnmower pass over `r`: lanes run along y, one lane per footprint width,
/// alternating direction. Waypoints are footprint centres on a grid anchored
/// at r.lo, so the last row or lane may overhang the far edge.
std::vector<Vec2> Boustrophedon(const Rect& r, Vec2 footprint);

/// Flight time along the waypoints, starting at the first one.
double PathSeconds(const std::vector<Vec2>& waypoints, double speed_mps);

struct SweepPlan {
  std::vector<Rect> sub_areas;
  std::vector<std::vector<Vec2>> waypoints;
  // Per drone, how many leading waypoints fit in the endurance.
  std::vector<size_t> reachable;
  // Longest per-drone sweep.
  double sweep_seconds = 0;
  // Area imaged within the endurance over total area.
  double coverage_fraction = 0;
  // Informational: the endurance does not cover the whole sweep.
  bool area_too_large = false;
};

/// InvalidArgument for an empty area, no drones or a non-positive speed.
absl::StatusOr<SweepPlan> PlanSweep(const Rect& area, int drones,
                                    Vec2 footprint, double speed_mps,
                                    double endurance_s);

}  // namespace iod::fleet

#endif  // IOD_FLEET_SWEEP_H_
