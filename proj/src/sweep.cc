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

#include "iod/fleet/sweep.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "absl/status/status.h"

namespace iod::fleet {
namespace {

double Rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Cells needed to tile `len` with pieces of `step`; a hair of slack keeps
// exact multiples from spilling into an extra cell.
int Cells(double len, double step) {
  return std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
}

}  // namespace

Rect Intersect(const Rect& a, const Rect& b) {
  Rect r{{std::max(a.lo.x, b.lo.x), std::max(a.lo.y, b.lo.y)},
         {std::min(a.hi.x, b.hi.x), std::min(a.hi.y, b.hi.y)}};
  if (r.hi.x < r.lo.x) r.hi.x = r.lo.x;
  if (r.hi.y < r.lo.y) r.hi.y = r.lo.y;
  return r;
}

Vec2 CameraModel::FootprintSize() const {
  return {2 * altitude_m * std::tan(Rad(hfov_deg) / 2),
          2 * altitude_m * std::tan(Rad(vfov_deg) / 2)};
}

Rect FootprintAt(Vec2 c, Vec2 size) {
  return {{c.x - size.x / 2, c.y - size.y / 2}, {c.x + size.x / 2, c.y + size.y / 2}};
}

std::vector<Rect> SplitStrips(const Rect& area, int n) {
  std::vector<Rect> out;
  const double w = area.width() / n;
  for (int i = 0; i < n; ++i) {
    Rect r = area;
    r.lo.x = area.lo.x + w * i;
    // The last strip ends exactly on the area edge.
    r.hi.x = i + 1 == n ? area.hi.x : area.lo.x + w * (i + 1);
    out.push_back(r);
  }
  return out;
}

std::vector<Vec2> Boustrophedon(const Rect& r, Vec2 fp) {
  const int lanes = Cells(r.width(), fp.x);
  const int rows = Cells(r.height(), fp.y);
  std::vector<Vec2> out;
  out.reserve(static_cast<size_t>(lanes) * rows);
  for (int l = 0; l < lanes; ++l) {
    const double x = r.lo.x + (l + 0.5) * fp.x;
    for (int k = 0; k < rows; ++k) {
      const int row = l % 2 == 0 ? k : rows - 1 - k;
      out.push_back({x, r.lo.y + (row + 0.5) * fp.y});
    }
  }
  return out;
}

double PathSeconds(const std::vector<Vec2>& w, double speed_mps) {
  double d = 0;
  for (size_t i = 1; i < w.size(); ++i) d += Distance(w[i - 1], w[i]);
  return d / speed_mps;
}

absl::StatusOr<SweepPlan> PlanSweep(const Rect& area, int drones, Vec2 fp,
                                    double speed_mps, double endurance_s) {
  if (area.width() <= 0 || area.height() <= 0) {
    return absl::InvalidArgumentError("empty sweep area");
  }
  if (drones < 1) return absl::InvalidArgumentError("no drones to sweep with");
  if (speed_mps <= 0 || fp.x <= 0 || fp.y <= 0) {
    return absl::InvalidArgumentError("speed and footprint must be positive");
  }
  SweepPlan plan;
  plan.sub_areas = SplitStrips(area, drones);
  double covered = 0;
  for (const Rect& sub : plan.sub_areas) {
    std::vector<Vec2> w = Boustrophedon(sub, fp);
    plan.sweep_seconds = std::max(plan.sweep_seconds, PathSeconds(w, speed_mps));
    size_t n = 0;
    double t = 0;
    for (size_t i = 0; i < w.size(); ++i) {
      if (i > 0) t += Distance(w[i - 1], w[i]) / speed_mps;
      if (t > endurance_s) break;
      covered += Intersect(FootprintAt(w[i], fp), sub).area();
      ++n;
    }
    plan.reachable.push_back(n);
    plan.waypoints.push_back(std::move(w));
  }
  plan.coverage_fraction = std::min(1.0, covered / area.area());
  plan.area_too_large = plan.sweep_seconds > endurance_s;
  return plan;
}

}  // namespace iod::fleet
