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

#ifndef IOD_SIM_KERNEL_H_
#define IOD_SIM_KERNEL_H_

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <unordered_set>
#include <vector>

#include "absl/status/statusor.h"
#include "iod/sim/random.h"
#include "iod/sim/time.h"

namespace iod {

using EventId = uint64_t;

/// One processed event as it appears in the replay trace.
struct TraceRecord {
  uint64_t seq = 0;
  SimTime fire_at;
  NodeId target;
  std::string tag;
};

/// Deterministic single-threaded discrete-event scheduler.
///
/// Events are totally ordered by (fire_at, seq) where seq is the insertion
/// ordinal. The clock never moves backwards. Every processed event is folded
/// into a running trace digest; optionally the full trace is retained.
class Kernel {
 public:
  using Handler = std::function<void()>;

  explicit Kernel(uint64_t master_seed);

  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  SimTime now() const { return now_; }

  /// Fails with InvalidArgument ("PastTime") when fire_at < now().
  absl::StatusOr<EventId> Schedule(SimTime fire_at, NodeId target,
                                   std::string tag, Handler handler);
  /// Schedules at now() + delay; delay must be non-negative.
  EventId ScheduleAfter(SimTime delay, NodeId target, std::string tag,
                        Handler handler);
  /// Lazily cancels a pending event. Returns false if unknown or processed.
  bool Cancel(EventId id);

  /// Processes every event with fire_at <= t in order, then sets clock = t.
  absl::StatusOr<size_t> RunUntil(SimTime t);
  /// Processes events until the queue is empty or `limit` is reached.
  size_t RunUntilIdle(SimTime limit = SimTime::Max());

  size_t pending() const { return live_.size(); }
  uint64_t processed() const { return processed_; }

  RandomStreams& streams() { return streams_; }

  void set_keep_trace(bool keep) { keep_trace_ = keep; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  /// FNV-1a digest over the canonical text of every processed event.
  uint64_t trace_digest() const { return trace_digest_; }

 private:
  struct Pending {
    SimTime fire_at;
    uint64_t seq;
    NodeId target;
    std::string tag;
    Handler handler;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  void Fire(Pending ev);

  SimTime now_;
  uint64_t next_seq_ = 0;
  uint64_t processed_ = 0;
  std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
  std::unordered_set<EventId> live_;
  std::unordered_set<EventId> cancelled_;
  RandomStreams streams_;
  bool keep_trace_ = false;
  std::vector<TraceRecord> trace_;
  uint64_t trace_digest_;
};

}  // namespace iod

#endif  // IOD_SIM_KERNEL_H_
