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

#include "iod/ordering/trace.h"

#include <algorithm>
#include <map>

#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace iod::ordering {

const char* RaftTraceKindName(RaftTraceRecord::Kind k) {
  switch (k) {
    case RaftTraceRecord::kTerm:
      return "term";
    case RaftTraceRecord::kRole:
      return "role";
    case RaftTraceRecord::kVote:
      return "vote";
    case RaftTraceRecord::kCommit:
      return "commit";
    case RaftTraceRecord::kApply:
      return "apply";
    case RaftTraceRecord::kCut:
      return "cut";
    case RaftTraceRecord::kCrash:
      return "crash";
    case RaftTraceRecord::kRecover:
      return "recover";
  }
  return "?";
}

std::string RaftTrace::ToJsonl() const {
  std::string out;
  for (const RaftTraceRecord& r : records_) {
    nlohmann::json j = {{"t_us", r.at.micros()},
                        {"node", r.node},
                        {"event", RaftTraceKindName(r.kind)},
                        {"term", r.term}};
    switch (r.kind) {
      case RaftTraceRecord::kRole:
        j["role"] = std::string(RaftRoleName(r.role));
        break;
      case RaftTraceRecord::kVote:
        j["vote_for"] = r.vote_for;
        break;
      case RaftTraceRecord::kCommit:
        j["index"] = r.index;
        break;
      case RaftTraceRecord::kApply:
        j["index"] = r.index;
        j["entry"] = r.entry;
        j["block"] = r.block_number;
        break;
      case RaftTraceRecord::kCut:
        j["block"] = r.block_number;
        j["entry"] = r.entry;
        j["txs"] = r.tx_count;
        break;
      default:
        break;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

TraceCheck CheckElectionSafety(const RaftTrace& trace) {
  std::map<uint64_t, std::string> leader_of_term;
  for (const RaftTraceRecord& r : trace.records()) {
    if (r.kind != RaftTraceRecord::kRole || r.role != RaftRole::kLeader) {
      continue;
    }
    auto [it, fresh] = leader_of_term.emplace(r.term, r.node);
    if (!fresh && it->second != r.node) {
      return {false, absl::StrCat("term ", r.term, " has leaders ", it->second,
                                  " and ", r.node)};
    }
  }
  return {};
}

TraceCheck CheckAppliedAgreement(const RaftTrace& trace) {
  std::map<uint64_t, std::string> entry_at;
  for (const RaftTraceRecord& r : trace.records()) {
    if (r.kind != RaftTraceRecord::kApply) continue;
    auto [it, fresh] = entry_at.emplace(r.index, r.entry);
    if (!fresh && it->second != r.entry) {
      return {false, absl::StrCat("index ", r.index, " applied as ",
                                  it->second, " and ", r.entry, " by ",
                                  r.node)};
    }
  }
  return {};
}

TraceCheck CheckLogMatching(const std::vector<const RaftNode*>& nodes) {
  for (size_t a = 0; a < nodes.size(); ++a) {
    for (size_t b = a + 1; b < nodes.size(); ++b) {
      const uint64_t n =
          std::min(nodes[a]->commit_index(), nodes[b]->commit_index());
      for (uint64_t i = 0; i < n; ++i) {
        if (!(nodes[a]->log()[i] == nodes[b]->log()[i])) {
          return {false, absl::StrCat("nodes ", nodes[a]->id(), " and ",
                                      nodes[b]->id(), " differ at index ",
                                      i + 1)};
        }
      }
    }
  }
  return {};
}

}  // namespace iod::ordering
