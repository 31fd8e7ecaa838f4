// sim: run a scenario, re-run one from its manifest, or verify output hashes.
//
//   sim <scenario> --config <file> [--out <dir>] [--seeds <file>] [--workers N] [--force] [--lab-frame]
//   sim rerun --manifest <file> --out <dir> [--workers N] [--force]
//   sim verify --manifest <file>
//
// Exit code 0 iff every scenario-internal check passes; 1 on failed checks or
// hash mismatches; 2 on usage, config or IO errors.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "qsteady/xprun/run.hpp"

using namespace qsteady;
using namespace qsteady::xprun;

namespace {

void print_checks(const ScenarioOutput& out) {
  for (const auto& c : out.checks) {
    const char* tag = c.informational ? "INFO" : (c.passed ? "PASS" : "FAIL");
    std::cout << tag << "  " << c.name << "  value=" << (std::isfinite(c.value) ? format_double(c.value) : "-");
    if (!c.informational) std::cout << "  threshold=" << format_double(c.threshold);
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
    std::cout << '\n';
  }
}

json load_seeds(const std::string& path) {
  const json j = json::parse(read_file(path));
  if (!j.is_object()) throw InvalidArgument("seeds file must hold an object");
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsteady scenario runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds_path, manifest_path;
  int workers = 1;
  bool force = false, lab_frame = false;

  std::vector<CLI::App*> scenario_cmds;
  for (const auto& [sc, name] : scenario_names()) {
    auto* cmd = app.add_subcommand(name, "run the " + name + " scenario");
    cmd->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "output directory (default: config output_dir)");
    cmd->add_option("--seeds", seeds_path, "JSON seeds: {\"base\": n} and/or {\"<curve>\": [seeds]}")->check(CLI::ExistingFile);
    cmd->add_option("--workers", workers, "trajectory worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--force", force, "overwrite existing outputs");
    cmd->add_flag("--lab-frame", lab_frame, "quantum walk in the lab-frame Floquet model");
    scenario_cmds.push_back(cmd);
  }
  auto* rerun = app.add_subcommand("rerun", "re-run from a manifest and compare hashes");
  rerun->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  rerun->add_option("--out", out_dir)->required();
  rerun->add_option("--workers", workers)->check(CLI::PositiveNumber);
  rerun->add_flag("--force", force);
  auto* verify = app.add_subcommand("verify", "check output files against manifest hashes");
  verify->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      const auto m = RunManifest::load(manifest_path);
      const auto bad = verify_outputs(m, fs::path(manifest_path).parent_path());
      for (const auto& b : bad) std::cout << "MISMATCH  " << b.file << (b.actual.empty() ? "  (missing)" : "") << '\n';
      std::cout << (bad.empty() ? "verified " : "failed ") << m.hashes.size() << " files\n";
      return bad.empty() ? 0 : 1;
    }
    if (rerun->parsed()) {
      const auto m = RunManifest::load(manifest_path);
      const auto r = rerun_from_manifest(m, out_dir, workers, force);
      print_checks(r.execution.output);
      for (const auto& b : r.mismatches) std::cout << "MISMATCH  " << b.file << '\n';
      std::cout << (r.identical() ? "identical to manifest\n" : "differs from manifest\n");
      return r.identical() && r.execution.output.ok() ? 0 : 1;
    }
    for (auto* cmd : scenario_cmds) {
      if (!cmd->parsed()) continue;
      json user = json::parse(read_file(config_path));
      if (!user.contains("scenario")) user["scenario"] = cmd->get_name();
      if (user.at("scenario") != cmd->get_name())
        throw InvalidArgument("config scenario '" + user.at("scenario").get<std::string>() + "' does not match '" + cmd->get_name() + "'");
      if (lab_frame) user["lab_frame"] = true;
      RunOptions o;
      o.workers = workers;
      if (!seeds_path.empty()) {
        json s = load_seeds(seeds_path);
        if (s.contains("base")) {
          user["seeds"] = {{"base", s.at("base")}};
          s.erase("base");
        }
        o.seeds = s;
      }
      const auto cfg = parse_config(std::move(user), fs::path(config_path).parent_path());
      const fs::path dir = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
      const auto ex = execute(cfg, o, dir, force);
      print_checks(ex.output);
      std::cout << "wrote " << ex.manifest.hashes.size() << " files to " << dir.string() << '\n';
      return ex.output.ok() ? 0 : 1;
    }
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
