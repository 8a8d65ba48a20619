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

#include "iod/sim/kernel.h"

#include <string>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace iod {
namespace {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

uint64_t FoldFnv(uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Kernel::Kernel(uint64_t master_seed)
    : streams_(master_seed), trace_digest_(kFnvOffset) {}

absl::StatusOr<EventId> Kernel::Schedule(SimTime fire_at, NodeId target,
                                         std::string tag, Handler handler) {
  if (fire_at < now_) {
    return absl::InvalidArgumentError(
        absl::StrCat("PastTime: fire_at=", fire_at.micros(),
                     "us < clock=", now_.micros(), "us"));
  }
  const uint64_t seq = next_seq_++;
  live_.insert(seq);
  queue_.push(Pending{fire_at, seq, target, std::move(tag), std::move(handler)});
  return seq;
}

EventId Kernel::ScheduleAfter(SimTime delay, NodeId target, std::string tag,
                              Handler handler) {
  if (delay < SimTime::Zero()) delay = SimTime::Zero();
  return *Schedule(now_ + delay, target, std::move(tag), std::move(handler));
}

bool Kernel::Cancel(EventId id) {
  if (live_.erase(id) == 0) return false;
  cancelled_.insert(id);
  return true;
}

void Kernel::Fire(Pending ev) {
  live_.erase(ev.seq);
  now_ = ev.fire_at;
  ++processed_;
  const std::string line = absl::StrCat(ev.seq, ",", ev.fire_at.micros(), ",",
                                        ev.target.value, ",", ev.tag, "\n");
  trace_digest_ = FoldFnv(trace_digest_, line);
  if (keep_trace_) {
    trace_.push_back(TraceRecord{ev.seq, ev.fire_at, ev.target, ev.tag});
  }
  if (ev.handler) ev.handler();
}

absl::StatusOr<size_t> Kernel::RunUntil(SimTime t) {
  if (t < now_) {
    return absl::InvalidArgumentError("PastTime: run_until before clock");
  }
  size_t count = 0;
  while (!queue_.empty() && queue_.top().fire_at <= t) {
    Pending ev = std::move(const_cast<Pending&>(queue_.top()));
    queue_.pop();
    if (auto it = cancelled_.find(ev.seq); it != cancelled_.end()) {
      cancelled_.erase(it);
      continue;
    }
    Fire(std::move(ev));
    ++count;
  }
  now_ = t;
  return count;
}

size_t Kernel::RunUntilIdle(SimTime limit) {
  size_t count = 0;
  while (!queue_.empty() && queue_.top().fire_at <= limit) {
    Pending ev = std::move(const_cast<Pending&>(queue_.top()));
    queue_.pop();
    if (auto it = cancelled_.find(ev.seq); it != cancelled_.end()) {
      cancelled_.erase(it);
      continue;
    }
    Fire(std::move(ev));
    ++count;
  }
  return count;
}

}  // namespace iod
