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

// Command-line front end: run scenarios, audit ledger exports and print
// report tables.
//
// Exit codes: 0 success, 2 invariant violation or invalid chain, 1 error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_split.h"
#include "iod/ledger/chain.h"
#include "iod/scenario/report.h"
#include "iod/scenario/runner.h"
#include "iod/scenario/scenario.h"
#include "json.hpp"

namespace {

using iod::scenario::RunArtifacts;

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kViolation = 2;

int Fail(const absl::Status& s) {
  std::cerr << "error: " << s << "\n";
  return kError;
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

absl::StatusOr<RunArtifacts> RunOnce(const iod::scenario::Scenario& s,
                                     iod::scenario::RunOptions opts) {
  auto sim = iod::scenario::Simulation::Build(s, opts);
  if (!sim.ok()) return sim.status();
  if (absl::Status st = (*sim)->Run(); !st.ok()) return st;
  return iod::scenario::MakeArtifacts(**sim);
}

void PrintSummary(const RunArtifacts& a) {
  const auto& m = a.metrics;
  int found = 0, reported = 0;
  for (const auto& v : m.victims) {
    found += v.discovered_us.has_value();
    reported += v.reported_us.has_value();
  }
  std::cout << "scenario " << m.scenario << " seed " << m.seed << ": ended at "
            << m.end_us / 1e6 << " s, " << m.kernel_events << " events, trace "
            << m.kernel_digest << "\n";
  std::cout << "  victims found " << found << "/" << m.victims.size() << ", reported "
            << reported << "; verified reports " << m.urgent_delivered << "/" << m.urgent
            << " delivered\n";
  std::cout << "  ledger: " << m.blocks << " blocks, " << m.chain_txs << " txs\n";
  for (const auto& c : a.invariants.checks) {
    if (!c.ok) std::cout << "  VIOLATION " << c.name << ": " << c.detail << "\n";
  }
  std::cout << "  invariants " << (a.invariants.ok() ? "hold" : "violated") << "\n";
}

int Simulate(const std::string& scenario, std::optional<uint64_t> seed,
             std::optional<double> until, const std::string& out,
             const std::string& format) {
  auto s = iod::scenario::LoadScenario(scenario);
  if (!s.ok()) return Fail(s.status());
  auto a = RunOnce(*s, {.seed = seed, .until_s = until});
  if (!a.ok()) return Fail(a.status());
  if (absl::Status st = iod::scenario::WriteArtifacts(*a, out, format); !st.ok()) {
    return Fail(st);
  }
  PrintSummary(*a);
  return a->invariants.ok() ? kOk : kViolation;
}

int VerifyChain(const std::string& path) {
  auto bytes = ReadFile(path);
  if (!bytes.ok()) return Fail(bytes.status());
  const iod::ledger::VerifyReport r = iod::ledger::VerifyExport(*bytes);
  if (r.ok) {
    std::cout << "chain ok: " << r.blocks_checked << " blocks\n";
    return kOk;
  }
  std::cout << "chain invalid at block " << r.bad_block << ": "
            << iod::ledger::BadBlockReasonName(r.reason)
            << (r.detail.empty() ? "" : " (" + r.detail + ")") << "\n";
  return kViolation;
}

int Report(const std::string& dir, const std::string& tables) {
  auto text = ReadFile(dir + "/report.json");
  if (!text.ok()) return Fail(text.status());
  nlohmann::json doc = nlohmann::json::parse(*text, nullptr, false);
  if (doc.is_discarded()) return Fail(absl::InvalidArgumentError("report.json is not JSON"));
  std::vector<std::string> which = absl::StrSplit(tables, ',', absl::SkipEmpty());
  auto rendered = iod::scenario::RenderTables(doc, which);
  if (!rendered.ok()) return Fail(rendered.status());
  std::cout << *rendered;
  return kOk;
}

int Sweep(const std::string& scenario, const std::string& seeds, const std::string& out) {
  std::vector<std::string> ends = absl::StrSplit(seeds, "..");
  uint64_t lo = 0, hi = 0;
  if (ends.size() != 2 || !absl::SimpleAtoi(ends[0], &lo) ||
      !absl::SimpleAtoi(ends[1], &hi) || hi < lo) {
    return Fail(absl::InvalidArgumentError("--seeds must look like A..B with A <= B"));
  }
  auto s = iod::scenario::LoadScenario(scenario);
  if (!s.ok()) return Fail(s.status());
  bool all_ok = true;
  std::cout << "seed,trace_digest,victims_found,victims,urgent,urgent_delivered,blocks,"
               "invariants\n";
  for (uint64_t seed = lo; seed <= hi; ++seed) {
    auto a = RunOnce(*s, {.seed = seed});
    if (!a.ok()) return Fail(a.status());
    if (!out.empty()) {
      const std::string dir = absl::StrCat(out, "/seed-", seed);
      if (absl::Status st = iod::scenario::WriteArtifacts(*a, dir, "json"); !st.ok()) {
        return Fail(st);
      }
    }
    const auto& m = a->metrics;
    int found = 0;
    for (const auto& v : m.victims) found += v.discovered_us.has_value();
    std::cout << seed << "," << m.kernel_digest << "," << found << "," << m.victims.size()
              << "," << m.urgent << "," << m.urgent_delivered << "," << m.blocks << ","
              << (a->invariants.ok() ? "ok" : "violated") << "\n";
    all_ok = all_ok && a->invariants.ok();
  }
  return all_ok ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Internet-of-Drones search-and-rescue simulator with a permissioned ledger"};
  app.require_subcommand(1);

  std::string scenario, out, format = "json";
  std::optional<uint64_t> seed;
  std::optional<double> until;
  auto* sim = app.add_subcommand("simulate", "Run one scenario and write its outputs");
  sim->add_option("--scenario", scenario, "Scenario file or bundled name")->required();
  sim->add_option("--seed", seed, "Master seed (default: the scenario's)");
  sim->add_option("--until", until, "Stop at this simulated time in seconds");
  sim->add_option("--out", out, "Output directory")->required();
  sim->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string ledger_path;
  auto* verify = app.add_subcommand("verify-chain", "Check a binary ledger export");
  verify->add_option("--ledger", ledger_path, "ledger.bin written by simulate")->required();

  std::string in_dir, tables = "offload,link,ledger";
  auto* report = app.add_subcommand("report", "Print tables from a run directory");
  report->add_option("--in", in_dir, "Directory written by simulate")->required();
  report->add_option("--tables", tables, "Comma-separated: offload, link, ledger");

  std::string seeds, sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Run one scenario over a range of seeds");
  sweep->add_option("--scenario", scenario, "Scenario file or bundled name")->required();
  sweep->add_option("--seeds", seeds, "Inclusive range A..B")->required();
  sweep->add_option("--out", sweep_out, "Write each run under DIR/seed-N");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }
  if (*sim) return Simulate(scenario, seed, until, out, format);
  if (*verify) return VerifyChain(ledger_path);
  if (*report) return Report(in_dir, tables);
  if (*sweep) return Sweep(scenario, seeds, sweep_out);
  return kError;
}
