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

#ifndef IOD_SIM_TIME_H_
#define IOD_SIM_TIME_H_

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>

namespace iod {

/// Simulation time (and durations) as integer microseconds.
///
/// Millisecond quantities coming from measured tables are rounded to the
/// nearest microsecond exactly once, at the boundary where they enter the
/// clock, so repeated additions never drift.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime FromMicros(int64_t us) { return SimTime(us); }
  static SimTime FromMillis(double ms) {
    return SimTime(static_cast<int64_t>(std::llround(ms * 1000.0)));
  }
  static SimTime FromSeconds(double s) {
    return SimTime(static_cast<int64_t>(std::llround(s * 1e6)));
  }
  static constexpr SimTime Zero() { return SimTime(0); }
  static constexpr SimTime Max() {
    return SimTime(std::numeric_limits<int64_t>::max());
  }

  constexpr int64_t micros() const { return us_; }
  constexpr double millis() const { return static_cast<double>(us_) / 1e3; }
  constexpr double seconds() const { return static_cast<double>(us_) / 1e6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime o) const { return SimTime(us_ + o.us_); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(us_ - o.us_); }
  constexpr SimTime& operator+=(SimTime o) {
    us_ += o.us_;
    return *this;
  }

 private:
  constexpr explicit SimTime(int64_t us) : us_(us) {}
  int64_t us_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, SimTime t) {
  return os << t.micros() << "us";
}

/// Identifies a simulated node (drone, edge server, orderer, peer...).
struct NodeId {
  uint32_t value = 0;

  constexpr auto operator<=>(const NodeId&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) {
  return os << "n" << id.value;
}

/// Planar position in meters.
struct Vec2 {
  double x = 0;
  double y = 0;

  constexpr bool operator==(const Vec2&) const = default;
};

inline double Distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace iod

template <>
struct std::hash<iod::NodeId> {
  size_t operator()(iod::NodeId id) const noexcept {
    return std::hash<uint32_t>()(id.value);
  }
};

#endif  // IOD_SIM_TIME_H_
