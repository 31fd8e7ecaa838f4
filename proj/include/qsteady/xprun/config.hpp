#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "qsteady/chain/json_io.hpp"
#include "qsteady/core/evolution.hpp"
#include "qsteady/xprun/manifest.hpp"

// Experiment configuration. A user file is merged over per-scenario defaults
// (JSON merge patch, so null removes a default) after *_file references are
// inlined; the merged object is the snapshot stored in the manifest and
// parses back to the same config.

namespace qsteady::xprun {

enum class Scenario { SingleQubit, QuantumWalk, NineChain, FiveChainPhaseSweep, FloquetCalibrate, SymmetryCheck };

inline const std::vector<std::pair<Scenario, std::string>>& scenario_names() {
  static const std::vector<std::pair<Scenario, std::string>> n{{Scenario::SingleQubit, "single_qubit"},
                                                               {Scenario::QuantumWalk, "quantum_walk"},
                                                               {Scenario::NineChain, "nine_chain"},
                                                               {Scenario::FiveChainPhaseSweep, "five_chain_phase_sweep"},
                                                               {Scenario::FloquetCalibrate, "floquet_calibrate"},
                                                               {Scenario::SymmetryCheck, "symmetry_check"}};
  return n;
}

inline std::string to_string(Scenario s) {
  for (const auto& [k, v] : scenario_names())
    if (k == s) return v;
  throw InvalidArgument("unknown scenario");
}

inline Scenario parse_scenario(const std::string& s) {
  for (const auto& [k, v] : scenario_names())
    if (v == s) return k;
  throw InvalidArgument("config: unknown scenario '" + s + "'");
}

inline json scenario_defaults(Scenario s) {
  const double pi = kPi;
  // 2.5 ns integration steps put 1.4, 1.7, 2, 2.5 and 5 us on the grid
  json common = {{"dt_section_ns", 7.5}, {"substeps", 3}, {"seeds", {{"base", 1}}}, {"output_dir", "out"}};
  json d;
  switch (s) {
    case Scenario::SingleQubit:
      d = {{"gamma_per_us", 1.0}, {"M", 100}, {"duration_us", 2.5}, {"n_samples", 100}};
      break;
    case Scenario::QuantumWalk:
      d = {{"device", {{"preset", "reference"}}},
           {"duration_us", 1.0},
           {"sample_dt_us", 0.005},
           {"phases_rad", {0.0, pi}},
           {"lab_frame", false},
           {"lab_dt_us", 1e-5},
           {"tolerance", {{"center", 0.05}, {"mirror", 0.02}}}};
      break;
    case Scenario::NineChain:
      d = {{"chain", {{"L", 9}, {"J_over_2pi_MHz", 11.0}}},
           {"dissipation", {{"site", 0}, {"gamma_per_us", 1.0}, {"T1_us", 30.0}, {"Tphi_us", 20.0}}},
           {"baseline", {{"J_over_2pi_MHz", 11.0}, {"J2_over_2pi_MHz", 1.0}, {"disorder", {{"fraction", 0.05}, {"seed", 20240501}}}}},
           {"M", 10},
           {"duration_us", 5.0},
           {"sample_dt_us", 0.025},
           {"variants", {"ideal", "decoherent", "symmetry_broken"}},
           {"initial_states", {"phi0", "psi0", "psipi"}},
           {"variant_overrides", json::object()},
           {"rerun_check", true},
           {"tolerance", {{"steady", 0.02}, {"broken", 0.05}, {"rerun_fraction", 0.95}}}};
      break;
    case Scenario::FiveChainPhaseSweep: {
      json phases = json::array();
      for (int k = 0; k <= 8; ++k) phases.push_back(k * pi / 8);
      d = {{"chain", {{"L", 5}, {"J_over_2pi_MHz", 11.0}}},
           {"dissipation", {{"site", 0}, {"gamma_per_us", 1.0}}},
           {"M", 100},
           {"duration_us", 2.0},
           {"sample_dt_us", 0.01},
           {"phases_rad", phases},
           {"eval_times_us", {1.4, 1.7, 2.0}},
           {"oracle", true},
           {"tolerance", {{"steady", 0.02}}}};
      break;
    }
    case Scenario::FloquetCalibrate:
      d = {{"device", {{"preset", "reference"}}},
           {"tone_checks", {{"nu_over_2pi_MHz", {210.0, 330.0}}, {"eps_over_nu", 1.84}, {"g_over_2pi_MHz", 11.0}}},
           {"nnn_testbed", {{"suppressed_first", {2, 6}}, {"retained_first", {4}}, {"duration_us", 2.0}}},
           {"fit_dt_us", 1e-5},
           {"tolerance", {{"fit_gap", 0.05}, {"suppression_ratio", 0.5}}}};
      break;
    case Scenario::SymmetryCheck:
      d = {{"L_values", {3, 5}},
           {"J_over_2pi_MHz", 11.0},
           {"gamma_per_us", 1.0},
           {"duration_us", 2.0},
           {"n_samples", 20},
           {"asymmetry", 0.05},
           {"tolerance", {{"commutator", 1e-10}, {"drift", 1e-6}, {"broken", 1e-6}}}};
      break;
  }
  common.merge_patch(d);
  common["scenario"] = to_string(s);
  return common;
}

/// Replaces "<key>_file": "path" with "<key>": <parsed file>, paths relative
/// to `base`.
inline void inline_file_refs(json& j, const fs::path& base) {
  if (!j.is_object()) return;
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items())
    if (k.size() > 5 && k.ends_with("_file")) keys.push_back(k);
  for (const auto& k : keys) {
    if (!j.at(k).is_string()) throw InvalidArgument("config: '" + k + "' must be a path");
    fs::path p = j.at(k).get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!fs::exists(p)) throw InvalidArgument("config: referenced file does not exist: " + p.string());
    json sub;
    try {
      sub = json::parse(read_file(p));
    } catch (const json::exception& e) {
      throw InvalidArgument("config: " + p.string() + ": " + e.what());
    }
    inline_file_refs(sub, p.parent_path());
    j[k.substr(0, k.size() - 5)] = sub;
    j.erase(k);
  }
}

struct ExperimentConfig {
  Scenario scenario = Scenario::SingleQubit;
  json snapshot;

  double dt_section = 0.0075;  // us
  long substeps = 5;
  long M = 1;
  double duration = 1.0;  // us
  double sample_dt = 0.0;  // us; 0 when n_samples is used
  long n_samples = 0;
  std::uint64_t seed_base = 1;
  std::string output_dir;

  double dt() const { return dt_section / double(substeps); }

  const json& at(const char* key) const {
    if (!snapshot.contains(key)) throw InvalidArgument(std::string("config: missing field '") + key + "'");
    return snapshot.at(key);
  }
  template <class T>
  T get(const char* key) const {
    try {
      return at(key).get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("config: field '") + key + "': " + e.what());
    }
  }
  bool has(const char* key) const { return snapshot.contains(key) && !snapshot.at(key).is_null(); }
};

/// Integer ratio a / b, or throws.
inline long exact_ratio(double a, double b, const std::string& what) {
  const double r = a / b;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - double(n)) > 1e-6 * std::max(1.0, r)) throw InvalidArgument("config: " + what);
  return n;
}

/// Integration grid for duration `duration` with the config's step and
/// sample spacing.
inline core::TimeGrid make_grid(const ExperimentConfig& c, double duration, double sample_dt = 0.0) {
  const double dt = c.dt();
  core::TimeGrid g;
  g.dt = dt;
  g.n_steps = exact_ratio(duration, dt, "duration " + std::to_string(duration) + " us is not a whole number of integration steps");
  const double sdt = sample_dt > 0.0 ? sample_dt : c.sample_dt;
  if (sdt > 0.0) {
    g.sample_stride = exact_ratio(sdt, dt, "sample_dt_us is not a whole number of integration steps");
  } else {
    require(c.n_samples >= 1, "config: need sample_dt_us or n_samples");
    require(g.n_steps % c.n_samples == 0, "config: n_samples does not divide the integration steps");
    g.sample_stride = g.n_steps / c.n_samples;
  }
  require(g.n_steps % g.sample_stride == 0, "config: sample spacing does not divide the duration");
  g.validate();
  return g;
}

namespace detail {

inline void check_positive(const ExperimentConfig& c, const char* key) {
  if (c.has(key)) require(c.get<double>(key) > 0.0, std::string("config: '") + key + "' must be positive");
}

inline std::vector<std::string> string_list(const ExperimentConfig& c, const char* key, const std::vector<std::string>& allowed) {
  const auto v = c.get<std::vector<std::string>>(key);
  for (const auto& s : v)
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) throw InvalidArgument("config: '" + s + "' is not a valid entry of " + key);
  return v;
}

}  // namespace detail

/// Chain for the scenario: explicit "chain" object, or the effective chain of
/// "device" (resolved later, since it needs fits).
inline chain::ChainSpec chain_of(const ExperimentConfig& c) { return chain::chain_from_json(c.at("chain")); }

inline chain::ChainSpec baseline_of(const ExperimentConfig& c, int L) {
  json b = c.at("baseline");
  b["L"] = L;
  return chain::chain_from_json(b);
}

/// Validates everything that does not need a simulation.
inline void validate(const ExperimentConfig& c) {
  require(c.M >= 1, "config: M must be >= 1");
  require(c.duration > 0.0, "config: duration_us must be positive");
  require(c.dt_section > 0.0 && c.substeps >= 1, "config: bad dt_section_ns / substeps");
  switch (c.scenario) {
    case Scenario::SingleQubit:
      require(c.get<double>("gamma_per_us") >= 0.0, "config: gamma_per_us must be >= 0");
      make_grid(c, c.duration);
      break;
    case Scenario::QuantumWalk: {
      if (c.has("chain")) {
        const auto ch = chain_of(c);
        require(ch.L >= 3 && ch.L % 2 == 1, "config: quantum walk needs an odd chain");
      } else {
        chain::device_from_json(c.at("device"));
      }
      for (double phi : c.get<std::vector<double>>("phases_rad"))
        require(std::abs(phi) < 1e-12 || std::abs(phi - kPi) < 1e-12, "config: quantum walk phases must be 0 or pi");
      require(!c.has("dissipation"), "config: the quantum walk has no dissipation");
      detail::check_positive(c, "lab_dt_us");
      require(c.sample_dt > 0.0, "config: quantum walk needs sample_dt_us");
      exact_ratio(c.duration, c.sample_dt, "sample_dt_us does not divide duration_us");
      break;
    }
    case Scenario::NineChain: {
      const auto ch = chain_of(c);
      require(ch.L >= 3 && ch.L % 2 == 1, "config: nine_chain needs an odd chain length");
      const auto d = chain::dissipation_from_json(c.at("dissipation"), ch.L);
      require(d.gamma_plus > 0.0 || d.gamma_minus > 0.0, "config: nine_chain needs center dissipation");
      const auto variants = detail::string_list(c, "variants", {"ideal", "decoherent", "symmetry_broken"});
      detail::string_list(c, "initial_states", {"phi0", "psi0", "psipi"});
      if (std::find(variants.begin(), variants.end(), "symmetry_broken") != variants.end()) baseline_of(c, ch.L);
      if (std::find(variants.begin(), variants.end(), "decoherent") != variants.end())
        require(d.has_decoherence(), "config: decoherent variant needs T1_us or Tphi_us");
      for (const auto& [k, v] : c.at("variant_overrides").items()) {
        require(std::find(variants.begin(), variants.end(), k) != variants.end(), "config: override for unknown variant " + k);
        if (v.contains("duration_us")) make_grid(c, v.at("duration_us").get<double>());
        if (v.contains("M")) require(v.at("M").get<long>() >= 1, "config: override M must be >= 1");
      }
      make_grid(c, c.duration);
      break;
    }
    case Scenario::FiveChainPhaseSweep: {
      const auto ch = chain_of(c);
      require(ch.L == 5, "config: the phase sweep is defined for L = 5");
      const auto d = chain::dissipation_from_json(c.at("dissipation"), ch.L);
      require(d.gamma_plus > 0.0 || d.gamma_minus > 0.0, "config: phase sweep needs center dissipation");
      require(!c.get<std::vector<double>>("phases_rad").empty(), "config: phases_rad is empty");
      make_grid(c, c.duration);
      break;
    }
    case Scenario::FloquetCalibrate:
      chain::device_from_json(c.at("device"));
      detail::check_positive(c, "fit_dt_us");
      break;
    case Scenario::SymmetryCheck:
      for (int L : c.get<std::vector<int>>("L_values"))
        require(L == 3 || L == 5, "config: symmetry_check null-space parts need L in {3, 5}");
      require(c.get<int>("n_samples") >= 1, "config: n_samples must be >= 1");
      break;
  }
}

/// `user` is the parsed config file; `base` the directory for relative
/// references. Throws InvalidArgument on any validation failure.
inline ExperimentConfig parse_config(json user, const fs::path& base = ".") {
  if (!user.is_object()) throw InvalidArgument("config: top level must be an object");
  if (!user.contains("scenario")) throw InvalidArgument("config: missing field 'scenario'");
  inline_file_refs(user, base);
  ExperimentConfig c;
  try {
    c.scenario = parse_scenario(user.at("scenario").get<std::string>());
    c.snapshot = scenario_defaults(c.scenario);
    c.snapshot.merge_patch(user);
    c.dt_section = c.get<double>("dt_section_ns") * 1e-3;
    c.substeps = c.get<long>("substeps");
    c.M = c.has("M") ? c.get<long>("M") : 1;
    c.duration = c.has("duration_us") ? c.get<double>("duration_us") : 1.0;
    c.sample_dt = c.has("sample_dt_us") ? c.get<double>("sample_dt_us") : 0.0;
    c.n_samples = c.has("n_samples") ? c.get<long>("n_samples") : 0;
    c.seed_base = c.at("seeds").value("base", std::uint64_t(1));
    c.output_dir = c.has("output_dir") ? c.get<std::string>("output_dir") : "out";
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw InvalidArgument("config file does not exist: " + path.string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InvalidArgument("config " + path.string() + ": " + e.what());
  }
  return parse_config(std::move(j), path.parent_path());
}

}  // namespace qsteady::xprun
