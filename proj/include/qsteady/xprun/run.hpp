#pragma once

#include <string>
#include <vector>

#include "qsteady/xprun/manifest.hpp"
#include "qsteady/xprun/scenarios.hpp"

namespace qsteady::xprun {

struct Execution {
  ScenarioOutput output;
  RunManifest manifest;
};

/// Runs the scenario and writes CSVs, extra documents, report.json and
/// manifest.json into `dir`.
inline Execution execute(const ExperimentConfig& c, const RunOptions& o, const fs::path& dir, bool force) {
  Execution ex;
  ex.manifest.config = c.snapshot;
  ex.manifest.started = utc_now();
  ex.output = run_scenario(c, o);
  ex.manifest.seeds = ex.output.seeds;
  ex.manifest.finished = utc_now();
  export_outputs(ex.output.files(), ex.manifest, dir, force);
  return ex;
}

struct Rerun {
  Execution execution;
  std::vector<HashMismatch> mismatches;  // against the original manifest
  bool identical() const { return mismatches.empty(); }
};

/// Re-executes the manifest's config with its recorded seeds into `dir` and
/// compares every data file hash.
inline Rerun rerun_from_manifest(const RunManifest& m, const fs::path& dir, int workers, bool force) {
  const ExperimentConfig c = parse_config(m.config);
  RunOptions o;
  o.workers = workers;
  o.seeds = m.seeds;
  Rerun r;
  r.execution = execute(c, o, dir, force);
  for (const auto& [name, want] : m.hashes) {
    auto it = r.execution.manifest.hashes.find(name);
    if (it == r.execution.manifest.hashes.end()) r.mismatches.push_back({name, want, ""});
    else if (it->second != want) r.mismatches.push_back({name, want, it->second});
  }
  for (const auto& [name, got] : r.execution.manifest.hashes)
    if (!m.hashes.count(name)) r.mismatches.push_back({name, "", got});
  return r;
}

}  // namespace qsteady::xprun
