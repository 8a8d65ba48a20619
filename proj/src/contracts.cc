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

#include "iod/txflow/contracts.h"

#include <algorithm>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace iod::txflow {
namespace {

using Json = nlohmann::json;

absl::Status BadArgs(std::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("BadArgs: ", std::string(what)));
}

const char* UrgencyName(Urgency u) {
  return u == Urgency::kUrgent ? "urgent" : "normal";
}

const char* StatusName(CaseStatus s) {
  switch (s) {
    case CaseStatus::kPending:
      return "pending";
    case CaseStatus::kAssigned:
      return "assigned";
    case CaseStatus::kClosed:
      return "closed";
  }
  return "?";
}

Json LocationJson(Vec2 v) { return Json{{"x", v.x}, {"y", v.y}}; }

Vec2 LocationFrom(const Json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>()};
}

Json OptionalString(const std::optional<std::string>& s) {
  return s ? Json(*s) : Json(nullptr);
}

std::optional<std::string> OptionalFrom(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

Json DroneJson(const DroneRecord& r) {
  return Json{{"drone_id", r.drone_id},
              {"location", LocationJson(r.location)},
              {"battery_fraction", r.battery_fraction},
              {"cluster", r.cluster},
              {"links", r.links},
              {"history_refs", r.history_refs}};
}

DroneRecord DroneFrom(const Json& j) {
  DroneRecord r;
  r.drone_id = j.at("drone_id").get<std::string>();
  r.location = LocationFrom(j.at("location"));
  r.battery_fraction = j.value("battery_fraction", 1.0);
  r.cluster = j.value("cluster", -1);
  r.links = j.value("links", std::vector<std::string>{});
  r.history_refs = j.value("history_refs", std::vector<std::string>{});
  return r;
}

Json TeamJson(const RescueTeamRecord& r) {
  return Json{{"team_id", r.team_id},
              {"location", LocationJson(r.location)},
              {"specialists", r.specialists},
              {"available", r.available},
              {"assigned_case", OptionalString(r.assigned_case)},
              {"archive_refs", r.archive_refs}};
}

RescueTeamRecord TeamFrom(const Json& j) {
  RescueTeamRecord r;
  r.team_id = j.at("team_id").get<std::string>();
  r.location = LocationFrom(j.at("location"));
  r.specialists = j.value("specialists", std::vector<std::string>{});
  std::sort(r.specialists.begin(), r.specialists.end());
  r.available = j.value("available", true);
  if (j.contains("assigned_case")) {
    r.assigned_case = OptionalFrom(j.at("assigned_case"));
  }
  r.archive_refs = j.value("archive_refs", std::vector<std::string>{});
  return r;
}

Json HospitalJson(const HospitalRecord& r) {
  return Json{{"hospital_id", r.hospital_id},
              {"location", LocationJson(r.location)},
              {"capabilities", r.capabilities}};
}

HospitalRecord HospitalFrom(const Json& j) {
  HospitalRecord r;
  r.hospital_id = j.at("hospital_id").get<std::string>();
  r.location = LocationFrom(j.at("location"));
  r.capabilities = j.value("capabilities", std::set<std::string>{});
  return r;
}

Json CaseJson(const VictimCase& c) {
  return Json{{"case_id", c.case_id},
              {"drone_id", c.drone_id},
              {"location", LocationJson(c.location)},
              {"urgency", UrgencyName(c.urgency)},
              {"required_specialists", c.required_specialists},
              {"required_capabilities", c.required_capabilities},
              {"reported_us", c.reported_us},
              {"status", StatusName(c.status)},
              {"team", OptionalString(c.team)},
              {"hospital", OptionalString(c.hospital)},
              {"no_hospital_match", c.no_hospital_match}};
}

absl::StatusOr<Urgency> UrgencyFrom(const std::string& s) {
  if (s == "normal") return Urgency::kNormal;
  if (s == "urgent") return Urgency::kUrgent;
  return BadArgs(absl::StrCat("urgency '", s, "'"));
}

absl::StatusOr<VictimCase> CaseFrom(const Json& j) {
  VictimCase c;
  c.case_id = j.at("case_id").get<std::string>();
  c.drone_id = j.at("drone_id").get<std::string>();
  c.location = LocationFrom(j.at("location"));
  auto u = UrgencyFrom(j.at("urgency").get<std::string>());
  if (!u.ok()) return u.status();
  c.urgency = *u;
  c.required_specialists =
      j.value("required_specialists", std::vector<std::string>{});
  c.required_capabilities =
      j.value("required_capabilities", std::set<std::string>{});
  c.reported_us = j.value("reported_us", int64_t{0});
  const std::string status = j.value("status", std::string("pending"));
  if (status == "pending") {
    c.status = CaseStatus::kPending;
  } else if (status == "assigned") {
    c.status = CaseStatus::kAssigned;
  } else if (status == "closed") {
    c.status = CaseStatus::kClosed;
  } else {
    return BadArgs(absl::StrCat("status '", status, "'"));
  }
  if (j.contains("team")) c.team = OptionalFrom(j.at("team"));
  if (j.contains("hospital")) c.hospital = OptionalFrom(j.at("hospital"));
  c.no_hospital_match = j.value("no_hospital_match", false);
  return c;
}

template <typename T, typename F>
absl::StatusOr<T> DecodeWith(std::string_view text, F from) {
  Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return BadArgs("malformed JSON");
  try {
    if constexpr (std::is_same_v<decltype(from(j)), absl::StatusOr<T>>) {
      return from(j);
    } else {
      return T(from(j));
    }
  } catch (const Json::exception& e) {
    return BadArgs(e.what());
  }
}

// Priority among cases waiting for a team: urgent first, then oldest.
bool Before(const VictimCase& a, const VictimCase& b) {
  if (a.urgency != b.urgency) return a.urgency == Urgency::kUrgent;
  if (a.reported_us != b.reported_us) return a.reported_us < b.reported_us;
  return a.case_id < b.case_id;
}

bool Covers(const std::vector<std::string>& have,
            const std::vector<std::string>& need) {
  for (const std::string& n : need) {
    if (std::find(have.begin(), have.end(), n) == have.end()) return false;
  }
  return true;
}

// ---- Contract bodies ---------------------------------------------------------

class Exec {
 public:
  Exec(TxContext& ctx, const Json& args) : ctx_(ctx), args_(args) {}

  absl::StatusOr<Json> Run(ContractId c, std::string_view fn);

 private:
  template <typename T, typename F>
  absl::StatusOr<std::optional<T>> Load(const std::string& key, F from) {
    auto raw = ctx_.Get(key);
    if (!raw) return std::optional<T>();
    auto v = DecodeWith<T>(*raw, from);
    if (!v.ok()) return v.status();
    return std::optional<T>(*std::move(v));
  }

  absl::StatusOr<std::vector<std::string>> Index(const char* key) {
    auto raw = ctx_.Get(key);
    if (!raw) return std::vector<std::string>{};
    Json j = Json::parse(*raw, nullptr, false);
    if (j.is_discarded()) return BadArgs("corrupt index");
    return j.get<std::vector<std::string>>();
  }

  absl::StatusOr<std::vector<RescueTeamRecord>> AllTeams();
  absl::StatusOr<std::vector<HospitalRecord>> AllHospitals();

  absl::StatusOr<Json> RegisterDrones();
  absl::StatusOr<Json> UpdateDroneInfo();
  absl::StatusOr<Json> ReportVictim();
  absl::StatusOr<Json> QueryDrone();
  absl::StatusOr<Json> QueryVictim();
  absl::StatusOr<Json> RegisterTeams();
  absl::StatusOr<Json> ReleaseTeam();
  absl::StatusOr<Json> QueryTeam();
  absl::StatusOr<Json> ListTeams();
  absl::StatusOr<Json> RegisterHospitals();
  absl::StatusOr<Json> QueryHospital();
  absl::StatusOr<Json> ListHospitals();

  TxContext& ctx_;
  const Json& args_;
};

absl::StatusOr<Json> Exec::Run(ContractId c, std::string_view fn) {
  switch (c) {
    case ContractId::kDroneObject:
      if (fn == "register_drones") return RegisterDrones();
      if (fn == "update_drone_info") return UpdateDroneInfo();
      if (fn == "report_victim") return ReportVictim();
      if (fn == "query_drone") return QueryDrone();
      if (fn == "query_victim") return QueryVictim();
      break;
    case ContractId::kRescueTeam:
      if (fn == "register_teams") return RegisterTeams();
      if (fn == "release_team") return ReleaseTeam();
      if (fn == "query_team") return QueryTeam();
      if (fn == "list_teams") return ListTeams();
      break;
    case ContractId::kHospital:
      if (fn == "register_hospitals") return RegisterHospitals();
      if (fn == "query_hospital") return QueryHospital();
      if (fn == "list_hospitals") return ListHospitals();
      break;
  }
  return absl::NotFoundError(absl::StrCat("UnknownFunction: ", std::string(fn)));
}

absl::StatusOr<std::vector<RescueTeamRecord>> Exec::AllTeams() {
  auto ids = Index(kTeamIndexKey);
  if (!ids.ok()) return ids.status();
  std::vector<RescueTeamRecord> out;
  for (const std::string& id : *ids) {
    auto t = Load<RescueTeamRecord>(TeamKey(id), TeamFrom);
    if (!t.ok()) return t.status();
    if (*t) out.push_back(**t);
  }
  return out;
}

absl::StatusOr<std::vector<HospitalRecord>> Exec::AllHospitals() {
  auto ids = Index(kHospitalIndexKey);
  if (!ids.ok()) return ids.status();
  std::vector<HospitalRecord> out;
  for (const std::string& id : *ids) {
    auto h = Load<HospitalRecord>(HospitalKey(id), HospitalFrom);
    if (!h.ok()) return h.status();
    if (*h) out.push_back(**h);
  }
  return out;
}

absl::StatusOr<Json> Exec::RegisterDrones() {
  std::vector<std::string> ids;
  for (const Json& d : args_.at("drones")) {
    DroneRecord r = DroneFrom(d);
    if (r.drone_id.empty()) return BadArgs("empty drone_id");
    if (ctx_.Get(DroneKey(r.drone_id))) {
      return absl::AlreadyExistsError(
          absl::StrCat("DuplicateDrone: ", r.drone_id));
    }
    ctx_.Put(DroneKey(r.drone_id), EncodeDrone(r));
    ids.push_back(r.drone_id);
  }
  return Json{{"registered", ids}};
}

absl::StatusOr<Json> Exec::UpdateDroneInfo() {
  const std::string id = args_.at("drone_id").get<std::string>();
  auto rec = Load<DroneRecord>(DroneKey(id), DroneFrom);
  if (!rec.ok()) return rec.status();
  if (!*rec) return absl::NotFoundError(absl::StrCat("UnknownDrone: ", id));
  DroneRecord r = **rec;
  r.location = LocationFrom(args_.at("location"));
  r.battery_fraction = args_.at("battery").get<double>();
  if (args_.contains("links")) {
    r.links = args_.at("links").get<std::vector<std::string>>();
  }
  if (args_.contains("payload_digest")) {
    r.history_refs.push_back(args_.at("payload_digest").get<std::string>());
    if (r.history_refs.size() > kMaxHistoryRefs) {
      r.history_refs.erase(r.history_refs.begin(),
                           r.history_refs.end() - kMaxHistoryRefs);
    }
  }
  ctx_.Put(DroneKey(id), EncodeDrone(r));
  return Json{{"drone_id", id}, {"history", r.history_refs.size()}};
}

absl::StatusOr<Json> Exec::ReportVictim() {
  VictimCase c;
  c.case_id = args_.at("case_id").get<std::string>();
  c.drone_id = args_.at("drone_id").get<std::string>();
  c.location = LocationFrom(args_.at("location"));
  auto u = UrgencyFrom(args_.value("urgency", std::string("normal")));
  if (!u.ok()) return u.status();
  c.urgency = *u;
  c.required_specialists =
      args_.value("specialists", std::vector<std::string>{});
  std::sort(c.required_specialists.begin(), c.required_specialists.end());
  c.reported_us = args_.value("reported_us", int64_t{0});
  if (c.case_id.empty()) return BadArgs("empty case_id");

  if (!ctx_.Get(DroneKey(c.drone_id))) {
    return absl::NotFoundError(absl::StrCat("UnknownDrone: ", c.drone_id));
  }
  if (ctx_.Get(CaseKey(c.case_id))) {
    return absl::AlreadyExistsError(absl::StrCat("DuplicateCase: ", c.case_id));
  }

  // Drone object -> rescue team.
  auto teams = AllTeams();
  if (!teams.ok()) return teams.status();
  c.team = SelectTeam(*teams, c.location, c.required_specialists);
  if (c.team) {
    c.status = CaseStatus::kAssigned;
    for (RescueTeamRecord& t : *teams) {
      if (t.team_id != *c.team) continue;
      t.available = false;
      t.assigned_case = c.case_id;
      ctx_.Put(TeamKey(t.team_id), EncodeTeam(t));
    }
  } else {
    auto q = Index(kPendingQueueKey);
    if (!q.ok()) return q.status();
    q->push_back(c.case_id);
    // Keep the queue in priority order; the new case's record is written
    // below, so look it up from the local copy.
    std::vector<VictimCase> waiting;
    for (const std::string& id : *q) {
      if (id == c.case_id) {
        waiting.push_back(c);
        continue;
      }
      auto w = Load<VictimCase>(CaseKey(id), CaseFrom);
      if (!w.ok()) return w.status();
      if (*w) waiting.push_back(**w);
    }
    std::sort(waiting.begin(), waiting.end(), Before);
    std::vector<std::string> ordered;
    for (const VictimCase& w : waiting) ordered.push_back(w.case_id);
    ctx_.Put(kPendingQueueKey, Json(ordered).dump());
  }

  // -> hospital, for urgent cases only.
  std::string hospital_outcome = "NotRequired";
  if (c.urgency == Urgency::kUrgent) {
    c.required_capabilities =
        args_.value("hospital_needs", std::set<std::string>{});
    if (c.required_capabilities.empty()) {
      c.required_capabilities.insert(kDefaultUrgentCapability);
    }
    auto hospitals = AllHospitals();
    if (!hospitals.ok()) return hospitals.status();
    c.hospital = SelectHospital(*hospitals, c.location, c.required_capabilities);
    c.no_hospital_match = !c.hospital;
    hospital_outcome = c.hospital ? "Assigned" : "NoHospitalMatch";
  }
  ctx_.Put(CaseKey(c.case_id), EncodeCase(c));
  return Json{{"case_id", c.case_id},
              {"team", OptionalString(c.team)},
              {"hospital", OptionalString(c.hospital)},
              {"outcome", c.team ? "Assigned" : "NoTeamAvailable"},
              {"hospital_outcome", hospital_outcome}};
}

absl::StatusOr<Json> Exec::QueryDrone() {
  const std::string id = args_.at("drone_id").get<std::string>();
  auto rec = Load<DroneRecord>(DroneKey(id), DroneFrom);
  if (!rec.ok()) return rec.status();
  if (!*rec) return absl::NotFoundError(absl::StrCat("UnknownDrone: ", id));
  return DroneJson(**rec);
}

absl::StatusOr<Json> Exec::QueryVictim() {
  const std::string id = args_.at("case_id").get<std::string>();
  auto raw = ctx_.Get(CaseKey(id));
  if (!raw) return absl::NotFoundError(absl::StrCat("UnknownCase: ", id));
  return Json::parse(*raw);
}

absl::StatusOr<Json> Exec::RegisterTeams() {
  auto index = Index(kTeamIndexKey);
  if (!index.ok()) return index.status();
  std::set<std::string> ids(index->begin(), index->end());
  std::vector<std::string> added;
  for (const Json& t : args_.at("teams")) {
    RescueTeamRecord r = TeamFrom(t);
    if (r.team_id.empty()) return BadArgs("empty team_id");
    if (!ids.insert(r.team_id).second) {
      return absl::AlreadyExistsError(absl::StrCat("DuplicateTeam: ", r.team_id));
    }
    r.available = true;
    r.assigned_case.reset();
    ctx_.Put(TeamKey(r.team_id), EncodeTeam(r));
    added.push_back(r.team_id);
  }
  ctx_.Put(kTeamIndexKey,
           Json(std::vector<std::string>(ids.begin(), ids.end())).dump());
  return Json{{"registered", added}};
}

absl::StatusOr<Json> Exec::ReleaseTeam() {
  const std::string id = args_.at("team_id").get<std::string>();
  auto rec = Load<RescueTeamRecord>(TeamKey(id), TeamFrom);
  if (!rec.ok()) return rec.status();
  if (!*rec) return absl::NotFoundError(absl::StrCat("UnknownTeam: ", id));
  RescueTeamRecord team = **rec;
  if (team.available || !team.assigned_case) {
    return absl::FailedPreconditionError(absl::StrCat("TeamNotAssigned: ", id));
  }
  auto closed = Load<VictimCase>(CaseKey(*team.assigned_case), CaseFrom);
  if (!closed.ok()) return closed.status();
  if (*closed) {
    VictimCase c = **closed;
    c.status = CaseStatus::kClosed;
    ctx_.Put(CaseKey(c.case_id), EncodeCase(c));
  }
  team.archive_refs.push_back(*team.assigned_case);
  team.available = true;
  team.assigned_case.reset();

  // The released team is the only newly available one: give it to the
  // highest-priority waiting case it can serve.
  std::optional<std::string> next;
  auto queue = Index(kPendingQueueKey);
  if (!queue.ok()) return queue.status();
  std::vector<std::string> remaining;
  for (const std::string& cid : *queue) {
    if (next) {
      remaining.push_back(cid);
      continue;
    }
    auto w = Load<VictimCase>(CaseKey(cid), CaseFrom);
    if (!w.ok()) return w.status();
    if (!*w) continue;
    if (!Covers(team.specialists, (*w)->required_specialists)) {
      remaining.push_back(cid);
      continue;
    }
    VictimCase c = **w;
    c.status = CaseStatus::kAssigned;
    c.team = team.team_id;
    ctx_.Put(CaseKey(c.case_id), EncodeCase(c));
    team.available = false;
    team.assigned_case = c.case_id;
    next = c.case_id;
  }
  if (next) ctx_.Put(kPendingQueueKey, Json(remaining).dump());
  ctx_.Put(TeamKey(id), EncodeTeam(team));
  return Json{{"team_id", id}, {"next_case", OptionalString(next)}};
}

absl::StatusOr<Json> Exec::QueryTeam() {
  const std::string id = args_.at("team_id").get<std::string>();
  auto rec = Load<RescueTeamRecord>(TeamKey(id), TeamFrom);
  if (!rec.ok()) return rec.status();
  if (!*rec) return absl::NotFoundError(absl::StrCat("UnknownTeam: ", id));
  return TeamJson(**rec);
}

absl::StatusOr<Json> Exec::ListTeams() {
  auto teams = AllTeams();
  if (!teams.ok()) return teams.status();
  Json out = Json::array();
  for (const auto& t : *teams) out.push_back(TeamJson(t));
  return out;
}

absl::StatusOr<Json> Exec::RegisterHospitals() {
  auto index = Index(kHospitalIndexKey);
  if (!index.ok()) return index.status();
  std::set<std::string> ids(index->begin(), index->end());
  std::vector<std::string> added;
  for (const Json& h : args_.at("hospitals")) {
    HospitalRecord r = HospitalFrom(h);
    if (r.hospital_id.empty()) return BadArgs("empty hospital_id");
    if (r.capabilities.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("EmptyCapabilities: ", r.hospital_id));
    }
    if (!ids.insert(r.hospital_id).second) {
      return absl::AlreadyExistsError(
          absl::StrCat("DuplicateHospital: ", r.hospital_id));
    }
    ctx_.Put(HospitalKey(r.hospital_id), EncodeHospital(r));
    added.push_back(r.hospital_id);
  }
  ctx_.Put(kHospitalIndexKey,
           Json(std::vector<std::string>(ids.begin(), ids.end())).dump());
  return Json{{"registered", added}};
}

absl::StatusOr<Json> Exec::QueryHospital() {
  const std::string id = args_.at("hospital_id").get<std::string>();
  auto rec = Load<HospitalRecord>(HospitalKey(id), HospitalFrom);
  if (!rec.ok()) return rec.status();
  if (!*rec) return absl::NotFoundError(absl::StrCat("UnknownHospital: ", id));
  return HospitalJson(**rec);
}

absl::StatusOr<Json> Exec::ListHospitals() {
  auto hospitals = AllHospitals();
  if (!hospitals.ok()) return hospitals.status();
  Json out = Json::array();
  for (const auto& h : *hospitals) out.push_back(HospitalJson(h));
  return out;
}

}  // namespace

std::string_view ContractName(ContractId c) {
  switch (c) {
    case ContractId::kDroneObject:
      return "DroneObject";
    case ContractId::kRescueTeam:
      return "RescueTeam";
    case ContractId::kHospital:
      return "Hospital";
  }
  return "?";
}

std::optional<ContractId> ParseContract(std::string_view name) {
  for (ContractId c : {ContractId::kDroneObject, ContractId::kRescueTeam,
                       ContractId::kHospital}) {
    if (ContractName(c) == name) return c;
  }
  return std::nullopt;
}

const std::vector<FunctionSpec>& AllFunctions() {
  static const auto* kFunctions = new std::vector<FunctionSpec>{
      {ContractId::kDroneObject, "register_drones", false, 0},
      {ContractId::kDroneObject, "update_drone_info", false, kUpdateInfoBytes},
      {ContractId::kDroneObject, "report_victim", false, kUrgentInfoBytes},
      {ContractId::kDroneObject, "query_drone", true, kQueryDroneBytes},
      {ContractId::kDroneObject, "query_victim", true, 0},
      {ContractId::kRescueTeam, "register_teams", false, 0},
      {ContractId::kRescueTeam, "release_team", false, 0},
      {ContractId::kRescueTeam, "query_team", true, 0},
      {ContractId::kRescueTeam, "list_teams", true, 0},
      {ContractId::kHospital, "register_hospitals", false, 0},
      {ContractId::kHospital, "query_hospital", true, 0},
      {ContractId::kHospital, "list_hospitals", true, 0},
  };
  return *kFunctions;
}

absl::StatusOr<const FunctionSpec*> LookupFunction(std::string_view contract,
                                                   std::string_view function) {
  auto c = ParseContract(contract);
  if (!c) {
    return absl::NotFoundError(
        absl::StrCat("UnknownContract: ", std::string(contract)));
  }
  for (const FunctionSpec& f : AllFunctions()) {
    if (f.contract == *c && f.name == function) return &f;
  }
  return absl::NotFoundError(absl::StrCat("UnknownFunction: ",
                                          std::string(contract), ".",
                                          std::string(function)));
}

std::string EncodeDrone(const DroneRecord& r) { return DroneJson(r).dump(); }
std::string EncodeTeam(const RescueTeamRecord& r) { return TeamJson(r).dump(); }
std::string EncodeHospital(const HospitalRecord& r) {
  return HospitalJson(r).dump();
}
std::string EncodeCase(const VictimCase& c) { return CaseJson(c).dump(); }

absl::StatusOr<DroneRecord> DecodeDrone(std::string_view json) {
  return DecodeWith<DroneRecord>(json, DroneFrom);
}
absl::StatusOr<RescueTeamRecord> DecodeTeam(std::string_view json) {
  return DecodeWith<RescueTeamRecord>(json, TeamFrom);
}
absl::StatusOr<HospitalRecord> DecodeHospital(std::string_view json) {
  return DecodeWith<HospitalRecord>(json, HospitalFrom);
}
absl::StatusOr<VictimCase> DecodeCase(std::string_view json) {
  return DecodeWith<VictimCase>(json, CaseFrom);
}

std::string DroneKey(std::string_view id) {
  return absl::StrCat("drone/", std::string(id));
}
std::string TeamKey(std::string_view id) {
  return absl::StrCat("team/", std::string(id));
}
std::string HospitalKey(std::string_view id) {
  return absl::StrCat("hospital/", std::string(id));
}
std::string CaseKey(std::string_view id) {
  return absl::StrCat("victim/", std::string(id));
}

std::optional<std::string> SelectTeam(
    const std::vector<RescueTeamRecord>& teams, Vec2 at,
    const std::vector<std::string>& required) {
  const RescueTeamRecord* best = nullptr;
  double best_d = 0;
  for (const RescueTeamRecord& t : teams) {
    if (!t.available || !Covers(t.specialists, required)) continue;
    const double d = Distance(t.location, at);
    if (!best || d < best_d || (d == best_d && t.team_id < best->team_id)) {
      best = &t;
      best_d = d;
    }
  }
  if (!best) return std::nullopt;
  return best->team_id;
}

std::optional<std::string> SelectHospital(
    const std::vector<HospitalRecord>& hospitals, Vec2 at,
    const std::set<std::string>& required) {
  const HospitalRecord* best = nullptr;
  double best_d = 0;
  for (const HospitalRecord& h : hospitals) {
    if (!std::includes(h.capabilities.begin(), h.capabilities.end(),
                       required.begin(), required.end())) {
      continue;
    }
    const double d = Distance(h.location, at);
    if (!best || d < best_d ||
        (d == best_d && h.hospital_id < best->hospital_id)) {
      best = &h;
      best_d = d;
    }
  }
  if (!best) return std::nullopt;
  return best->hospital_id;
}

std::optional<std::string> TxContext::Get(const std::string& key) {
  if (auto w = writes_.find(key); w != writes_.end()) return w->second;
  auto v = state_.Get(key);
  reads_.try_emplace(key, v ? std::optional(v->version) : std::nullopt);
  if (!v) return std::nullopt;
  return v->value;
}

void TxContext::Put(const std::string& key, std::string value) {
  writes_[key] = std::move(value);
}

std::vector<ledger::ReadEntry> TxContext::read_set() const {
  std::vector<ledger::ReadEntry> out;
  for (const auto& [k, v] : reads_) out.push_back({k, v});
  return out;
}

std::vector<ledger::WriteEntry> TxContext::write_set() const {
  std::vector<ledger::WriteEntry> out;
  for (const auto& [k, v] : writes_) out.push_back({k, v});
  return out;
}

absl::StatusOr<ExecResult> Execute(const ledger::WorldState& state,
                                   std::string_view contract,
                                   std::string_view function,
                                   std::string_view args) {
  auto spec = LookupFunction(contract, function);
  if (!spec.ok()) return spec.status();
  Json j = Json::parse(args.empty() ? std::string_view("{}") : args, nullptr,
                       /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return BadArgs("args must be an object");
  TxContext ctx(state);
  absl::StatusOr<Json> out;
  try {
    out = Exec(ctx, j).Run((*spec)->contract, function);
  } catch (const Json::exception& e) {
    return BadArgs(e.what());
  }
  if (!out.ok()) return out.status();
  return ExecResult{out->dump(), ctx.read_set(), ctx.write_set()};
}

}  // namespace iod::txflow
