#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qsteady/chain/floquet.hpp"
#include "qsteady/chain/json_io.hpp"
#include "qsteady/core/liouvillian.hpp"
#include "qsteady/noise/ensemble.hpp"
#include "qsteady/symmetry/sectors.hpp"
#include "qsteady/symmetry/states.hpp"
#include "qsteady/xprun/config.hpp"
#include "qsteady/xprun/table.hpp"

namespace qsteady::xprun {

using core::Axis;
using core::LinearOperator;
using core::StateVector;

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
  bool informational = false;  // recorded, never fails the run

  json to_json() const {
    json j{{"name", name}, {"passed", passed}, {"detail", detail}, {"informational", informational}};
    j["value"] = std::isfinite(value) ? json(value) : json(nullptr);
    j["threshold"] = std::isfinite(threshold) ? json(threshold) : json(nullptr);
    return j;
  }
};

inline Check check_le(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value <= threshold, value, threshold, std::move(detail), false};
}

inline Check check_ge(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value >= threshold, value, threshold, std::move(detail), false};
}

inline Check record(std::string name, double value, std::string detail = {}) {
  return {std::move(name), true, value, std::numeric_limits<double>::quiet_NaN(), std::move(detail), true};
}

struct RunOptions {
  int workers = 1;
  json seeds = json::object();  // curve id -> explicit seed list
};

/// Seed lists per curve: explicit lists win, otherwise block k of the base
/// (k counts curves in the order a scenario requests them).
class SeedBook {
 public:
  static constexpr std::uint64_t kStride = 1u << 20;

  SeedBook(std::uint64_t base, json explicit_seeds) : base_(base), explicit_(std::move(explicit_seeds)) {}

  std::vector<std::uint64_t> take(const std::string& curve, long M) {
    std::vector<std::uint64_t> s;
    if (explicit_.is_object() && explicit_.contains(curve)) {
      s = explicit_.at(curve).get<std::vector<std::uint64_t>>();
      require(!s.empty(), "seeds: empty list for " + curve);
    } else {
      s = noise::consecutive_seeds(base_ + ordinal_ * kStride, M);
    }
    ++ordinal_;
    used_[curve] = s;
    return s;
  }

  const json& used() const { return used_; }

 private:
  std::uint64_t base_;
  json explicit_;
  std::uint64_t ordinal_ = 0;
  json used_ = json::object();
};

struct ScenarioOutput {
  Scenario scenario = Scenario::SingleQubit;
  std::vector<TimeSeriesTable> tables;
  std::vector<WalkTable> walks;
  std::vector<std::pair<std::string, json>> documents;  // extra JSON outputs
  json report = json::object();
  std::vector<Check> checks;
  json seeds = json::object();

  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed || c.informational; });
  }

  const TimeSeriesTable& table(const std::string& name) const {
    for (const auto& t : tables)
      if (t.name == name) return t;
    throw InvalidArgument("no table " + name);
  }

  const Check& check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw InvalidArgument("no check " + name);
  }

  json full_report() const {
    json r = report;
    r["scenario"] = to_string(scenario);
    json cs = json::array();
    for (const auto& c : checks) cs.push_back(c.to_json());
    r["checks"] = cs;
    r["passed"] = ok();
    return r;
  }

  std::vector<OutputFile> files() const {
    std::vector<OutputFile> out;
    for (const auto& t : tables) out.push_back({t.name + ".csv", to_csv(t)});
    for (const auto& w : walks) out.push_back({w.name + ".csv", to_csv(w)});
    for (const auto& [name, doc] : documents) out.push_back({name, doc.dump(2) + "\n"});
    out.push_back({"report.json", full_report().dump(2) + "\n"});
    return out;
  }
};

// ---------------------------------------------------------------------------
// Shared pieces

/// Fraction of points where |a - b| <= k * sqrt(sa^2 + sb^2).
inline double agreement_fraction(const Series& a, const Series& b, double k = 3.0, bool skip_first = false) {
  require(a.t.size() == b.t.size(), "agreement: series lengths differ");
  long hit = 0, n = 0;
  for (std::size_t i = skip_first ? 1 : 0; i < a.t.size(); ++i) {
    const double tol = k * std::hypot(a.sem[i], b.sem[i]);
    hit += std::abs(a.mean[i] - b.mean[i]) <= tol ? 1 : 0;
    ++n;
  }
  return n ? double(hit) / double(n) : 1.0;
}

inline int dissipative_site(const chain::DissipationSpec& d, int L) { return d.site > 0 ? d.site : (L + 1) / 2; }

/// Trajectory model for a static chain with site pump/loss. Equal rates use
/// the binary-noise unravelling on that site; unequal rates fall back to
/// jump channels.
inline noise::TrajectoryModel chain_model(const chain::ChainSpec& ch, const chain::DissipationSpec& d, double dt_section,
                                          bool decoherence) {
  noise::TrajectoryModel m;
  m.qubits = ch.L;
  m.chain = core::Hamiltonian(chain::xx_hamiltonian(ch));
  m.dt_section = dt_section;
  const int site = dissipative_site(d, ch.L);
  if (d.gamma_plus == d.gamma_minus) {
    m.gamma = d.gamma_plus;
    if (m.gamma > 0.0) m.noisy_sites = {site};
  } else {
    for (auto& j : chain::center_pump_loss(ch.L, d.gamma_plus, d.gamma_minus, site))
      if (j.rate > 0.0) m.decoherence.push_back(std::move(j));
  }
  if (decoherence) {
    chain::DissipationSpec only = d;
    only.gamma_plus = only.gamma_minus = 0.0;
    for (auto& j : only.jumps(ch.L, true)) m.decoherence.push_back(std::move(j));
  }
  return m;
}

inline LinearOperator end_to_end(int L) { return core::pauli_string({{1, Axis::Z}, {L, Axis::Z}}, L); }

inline StateVector named_state(const std::string& name, int L) {
  if (name == "phi0") return symmetry::phi_eta_state(L, 0);
  if (name == "psi0") return symmetry::bell_chain_state(L, 0.0);
  if (name == "psipi") return symmetry::bell_chain_state(L, kPi);
  throw InvalidArgument("unknown initial state " + name);
}

/// Late-time value predicted for a named initial state.
inline double named_prediction(const std::string& name, int L) {
  if (name == "phi0") return symmetry::predicted_steady_value(L, 0);
  return symmetry::predicted_phase_curve(L, name == "psi0" ? 0.0 : kPi);
}

inline json late_json(const LateTime& l) {
  return {{"value", l.value}, {"sem", l.sem}, {"drift", l.drift}, {"window_start_us", l.window_start},
          {"points", l.points}, {"stationary", l.stationary}};
}

// ---------------------------------------------------------------------------
// single_qubit

inline ScenarioOutput run_single_qubit(const ExperimentConfig& c, const RunOptions& o) {
  ScenarioOutput out;
  out.scenario = c.scenario;
  const double gamma = c.get<double>("gamma_per_us");
  const auto grid = make_grid(c, c.duration);
  const auto times = grid.sample_times();
  SeedBook seeds(c.seed_base, o.seeds);

  noise::TrajectoryModel m;
  m.qubits = 1;
  m.chain = core::Hamiltonian(LinearOperator::zero(2));
  m.gamma = gamma;
  m.noisy_sites = {1};
  m.dt_section = c.dt_section;
  const std::vector<LinearOperator> obs{core::single(Axis::Z, 1, 1)};
  const std::vector<std::pair<std::string, StateVector>> inits{{"sz_from_e", StateVector::excited(1, {1})},
                                                                {"sz_from_g", StateVector::ground(1)}};

  // Lindblad reference
  TimeSeriesTable lme{"single_qubit_lme", {}};
  const core::LindbladModel lm{core::Hamiltonian(LinearOperator::zero(2)), chain::center_pump_loss(1, gamma, gamma)};
  double analytic_gap = 0.0;
  for (const auto& [id, psi] : inits) {
    const auto ev = core::evolve_density(lm, core::DensityOperator::pure(psi), grid);
    std::vector<double> v;
    const double sign = id == "sz_from_e" ? 1.0 : -1.0;
    for (std::size_t k = 0; k < ev.states.size(); ++k) {
      v.push_back(core::expectation(obs[0], ev.states[k]));
      analytic_gap = std::max(analytic_gap, std::abs(v.back() - sign * std::exp(-2.0 * gamma * times[k])));
    }
    lme.append(id, times, v);
  }
  out.checks.push_back(check_le("lme_matches_exp_minus_2_gamma_t", analytic_gap, 1e-6));

  for (const auto& [name, route] : {std::pair{std::string("single_qubit_sse_experiment"), noise::DriveRoute::Pulse},
                                    std::pair{std::string("single_qubit_sse_numerical"), noise::DriveRoute::Eta}}) {
    noise::TrajectoryOptions opt;
    opt.route = route;
    const noise::TrajectoryEngine engine(m, grid, obs, opt);
    TimeSeriesTable t{name, {}};
    for (const auto& [id, psi] : inits) {
      const auto ens = noise::run_ensemble(engine, psi, {id}, seeds.take(name + ":" + id, c.M), o.workers);
      t.append(ens, {id});
    }
    for (const auto& [id, psi] : inits) {
      const double f = agreement_fraction(t.series(id), lme.series(id), 3.0, true);
      out.checks.push_back(check_ge(name + ":" + id + ":within_3sem_fraction", f, 0.95,
                                    "points after t = 0 where |mean - lme| <= 3 sem"));
    }
    out.tables.push_back(std::move(t));
  }
  out.tables.push_back(std::move(lme));
  out.report = {{"gamma_per_us", gamma}, {"dt_section_us", c.dt_section}, {"M", c.M}, {"samples", times.size() - 1}};
  out.seeds = seeds.used();
  return out;
}

// ---------------------------------------------------------------------------
// quantum_walk

/// Site densities along a sampled trajectory of a static chain.
inline std::vector<std::vector<double>> static_walk(const LinearOperator& h, const StateVector& psi0, double sample_dt, long n) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.dense());
  require(es.info() == Eigen::Success, "walk: eigensolver failed");
  CVector ph(es.eigenvalues().size());
  for (Index i = 0; i < ph.size(); ++i) ph(i) = std::exp(cplx(0.0, -es.eigenvalues()(i) * sample_dt));
  const CMatrix u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  const int L = psi0.qubits();
  std::vector<LinearOperator> nj;
  for (int j = 1; j <= L; ++j) nj.push_back(core::single(Axis::N, j, L));
  std::vector<std::vector<double>> out;
  CVector psi = psi0.amplitudes();
  for (long k = 0; k <= n; ++k) {
    if (k > 0) psi = u * psi;
    std::vector<double> row;
    for (const auto& op : nj) row.push_back(core::expectation_raw(op.matrix(), psi));
    out.push_back(std::move(row));
  }
  return out;
}

inline std::string phase_label(double phi) { return std::abs(phi) < 1e-12 ? "0" : "pi"; }

inline ScenarioOutput run_quantum_walk(const ExperimentConfig& c, const RunOptions&) {
  ScenarioOutput out;
  out.scenario = c.scenario;
  const bool lab = c.get<bool>("lab_frame");
  const long n = exact_ratio(c.duration, c.sample_dt, "sample_dt_us does not divide duration_us");
  std::vector<double> times;
  for (long k = 0; k <= n; ++k) times.push_back(double(k) * c.sample_dt);

  chain::ChainSpec ch;
  chain::FloquetDeviceSpec dev;
  const bool have_device = c.has("device");
  if (have_device) dev = chain::device_from_json(c.at("device"));
  if (c.has("chain")) {
    ch = chain_of(c);
    out.report["chain_source"] = "config";
  } else {
    chain::FitOptions fo;
    fo.dt = c.get<double>("lab_dt_us");
    const auto ec = chain::effective_couplings(dev, fo);
    ch = ec.chain;
    out.report["chain_source"] = "effective_couplings(device)";
    json bonds = json::array();
    for (const auto& e : ec.nn)
      bonds.push_back({{"bond", {e.j, e.k}}, {"fit_over_2pi_MHz", e.fit / kTwoPi}, {"bessel_over_2pi_MHz", e.bessel / kTwoPi}});
    out.report["bond_fits"] = bonds;
  }
  const int L = lab ? dev.L : ch.L;
  if (lab) require(have_device, "quantum walk: lab_frame needs a device");
  require(L >= 3 && L % 2 == 1, "quantum walk: odd chain length required");
  out.report["model"] = lab ? "lab_frame" : "effective_chain";
  out.report["chain"] = chain::to_json(ch);
  const int mid = (L + 1) / 2;
  const auto tol = c.at("tolerance");

  for (double phi : c.get<std::vector<double>>("phases_rad")) {
    const auto psi0 = symmetry::bell_chain_state(L, phi);
    std::vector<std::vector<double>> prof;
    if (lab) {
      const long sub = std::max(1L, long(std::ceil(c.sample_dt / c.get<double>("lab_dt_us") - 1e-9)));
      const auto ev = core::evolve_state(chain::lab_frame(dev), psi0, core::TimeGrid::spanning(c.duration, n, sub));
      for (const auto& s : ev.states) {
        std::vector<double> row;
        for (int j = 1; j <= L; ++j) row.push_back(core::expectation(core::single(Axis::N, j, L), s));
        prof.push_back(std::move(row));
      }
    } else {
      prof = static_walk(chain::xx_hamiltonian(ch), psi0, c.sample_dt, n);
    }
    const std::string label = phase_label(phi);
    double center = 0.0, mirror = 0.0, outside = 0.0;
    for (const auto& row : prof) {
      center = std::max(center, row[std::size_t(mid - 1)]);
      double o = 0.0;
      for (int j = 1; j <= L; ++j) {
        mirror = std::max(mirror, std::abs(row[std::size_t(j - 1)] - row[std::size_t(L - j)]));
        if (std::abs(j - mid) > 1) o += row[std::size_t(j - 1)];
      }
      outside = std::max(outside, o);
    }
    if (label == "pi") {
      out.checks.push_back(check_le("phi_pi:max_center_density", center, tol.value("center", 0.05)));
      out.checks.push_back(check_le("phi_pi:max_mirror_asymmetry", mirror, tol.value("mirror", 0.02)));
    } else {
      out.checks.push_back(record("phi_0:max_population_outside_center_three", outside,
                                  "max over t of the density outside sites center-1..center+1"));
      out.checks.push_back(record("phi_0:max_center_density", center));
    }
    out.report["phi_" + label] = {{"max_center_density", center}, {"max_mirror_asymmetry", mirror},
                                  {"max_outside_center_three", outside}};
    out.walks.push_back(WalkTable::from_profiles("quantum_walk_phi_" + label, times, prof));
  }
  return out;
}

// ---------------------------------------------------------------------------
// nine_chain

inline ScenarioOutput run_nine_chain(const ExperimentConfig& c, const RunOptions& o) {
  ScenarioOutput out;
  out.scenario = c.scenario;
  const auto ch = chain_of(c);
  const int L = ch.L;
  const auto diss = chain::dissipation_from_json(c.at("dissipation"), L);
  const auto variants = c.get<std::vector<std::string>>("variants");
  const auto states = c.get<std::vector<std::string>>("initial_states");
  const auto overrides = c.at("variant_overrides");
  const auto tol = c.at("tolerance");
  const bool rerun = c.get<bool>("rerun_check");
  const std::vector<LinearOperator> obs{end_to_end(L)};
  SeedBook seeds(c.seed_base, o.seeds);
  json rep = {{"L", L}, {"chain", chain::to_json(ch)}, {"dissipation", chain::to_json(diss)}};

  for (const auto& v : variants) {
    const json ov = overrides.contains(v) ? overrides.at(v) : json::object();
    const long M = ov.value("M", c.M);
    const double duration = ov.value("duration_us", c.duration);
    const auto chv = v == "symmetry_broken" ? baseline_of(c, L) : ch;
    const auto grid = make_grid(c, duration);
    const noise::TrajectoryEngine engine(chain_model(chv, diss, c.dt_section, v == "decoherent"), grid, obs);
    TimeSeriesTable t{"nine_chain_" + v, {}};
    json vr = {{"M", M}, {"duration_us", duration}};
    if (v == "symmetry_broken") vr["chain"] = chain::to_json(chv);
    for (const auto& s : states) {
      const std::string id = "corr_" + s;
      const auto psi = named_state(s, L);
      t.append(noise::run_ensemble(engine, psi, {id}, seeds.take(t.name + ":" + id, M), o.workers), {id});
      if (v == "decoherent" && rerun)
        t.append(noise::run_ensemble(engine, psi, {id}, seeds.take(t.name + ":" + id + "_rerun", M), o.workers),
                 {id + "_rerun"});
    }
    for (const auto& s : states) {
      const std::string id = "corr_" + s;
      const auto lt = late_time(t.series(id));
      vr[id] = late_json(lt);
      const std::string tag = v + ":" + id;
      if (v == "ideal") {
        double want = std::numeric_limits<double>::quiet_NaN();
        try {
          want = named_prediction(s, L);
        } catch (const symmetry::Unsupported&) {
        }
        if (std::isfinite(want)) {
          vr[id]["predicted"] = want;
          out.checks.push_back(check_le(tag + ":late_time_deviation", std::abs(lt.value - want), tol.value("steady", 0.02),
                                        "late " + format_double(lt.value) + " vs predicted " + format_double(want)));
        }
        out.checks.push_back(check_le(tag + ":late_time_drift", lt.drift, kMaxDrift));
      } else if (v == "symmetry_broken") {
        out.checks.push_back(check_le(tag + ":late_time_abs", std::abs(lt.value), tol.value("broken", 0.05),
                                      "window from " + format_double(lt.window_start) + " us"));
      } else if (v == "decoherent") {
        out.checks.push_back(record(tag + ":late_time", lt.value));
        if (rerun) {
          const double f = agreement_fraction(t.series(id), t.series(id + "_rerun"));
          vr[id]["rerun_within_3sem_fraction"] = f;
          out.checks.push_back(check_ge(tag + ":rerun_within_3sem_fraction", f, tol.value("rerun_fraction", 0.95),
                                        "fresh-seed rerun, |a - b| <= 3 sqrt(sa^2 + sb^2)"));
        }
      }
    }
    rep[v] = vr;
    out.tables.push_back(std::move(t));
  }
  out.report = rep;
  out.seeds = seeds.used();
  return out;
}

// ---------------------------------------------------------------------------
// five_chain_phase_sweep

/// Late-time <s1z sLz> from the Liouvillian null space, for each phase.
inline std::vector<double> null_space_values(const chain::ChainSpec& ch, const chain::DissipationSpec& d,
                                             const std::vector<double>& phases, int* dimension = nullptr) {
  const core::LindbladModel lm{core::Hamiltonian(chain::xx_hamiltonian(ch)), d.jumps(ch.L, false)};
  const auto ns = core::steady_states(core::liouvillian_matrix(lm));
  if (dimension) *dimension = ns.dimension();
  const CMatrix zz = end_to_end(ch.L).dense();
  std::vector<double> out;
  for (double phi : phases) {
    const auto psi = symmetry::bell_chain_state(ch.L, phi);
    const CMatrix rho = core::project_to_steady(ns, psi.amplitudes() * psi.amplitudes().adjoint());
    out.push_back((zz * rho).trace().real());
  }
  return out;
}

inline ScenarioOutput run_phase_sweep(const ExperimentConfig& c, const RunOptions& o) {
  ScenarioOutput out;
  out.scenario = c.scenario;
  const auto ch = chain_of(c);
  const int L = ch.L;
  const auto diss = chain::dissipation_from_json(c.at("dissipation"), L);
  const auto phases = c.get<std::vector<double>>("phases_rad");
  const auto eval = c.get<std::vector<double>>("eval_times_us");
  const double tol = c.at("tolerance").value("steady", 0.02);
  const auto grid = make_grid(c, c.duration);
  const noise::TrajectoryEngine engine(chain_model(ch, diss, c.dt_section, false), grid, {end_to_end(L)});
  SeedBook seeds(c.seed_base, o.seeds);

  TimeSeriesTable t{"five_chain_phase_sweep", {}};
  TimeSeriesTable te{"five_chain_phase_sweep_eval", {}};
  json rows = json::array();
  std::vector<double> late;
  double worst = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const std::string id = "corr_phi_" + std::to_string(i);
    t.append(noise::run_ensemble(engine, symmetry::bell_chain_state(L, phases[i]), {id}, seeds.take(t.name + ":" + id, c.M),
                                 o.workers),
             {id});
    const auto s = t.series(id);
    const auto lt = late_time(s);
    late.push_back(lt.value);
    const double want = symmetry::predicted_phase_curve(L, phases[i]);
    worst = std::max(worst, std::abs(lt.value - want));
    json r = {{"observable_id", id}, {"phi_rad", phases[i]}, {"predicted", want}, {"late", late_json(lt)}};
    json ev = json::object();
    for (double te_us : eval) {
      if (te_us > s.t.back() + 1e-12) continue;
      const auto it = std::lower_bound(s.t.begin(), s.t.end(), te_us - 1e-12);
      const std::size_t k = std::min<std::size_t>(std::size_t(it - s.t.begin()), s.t.size() - 1);
      const double val = value_at(s, te_us);
      te.rows.push_back({te_us, id, val, s.sem[k], s.M});
      ev[format_double(te_us)] = val;
    }
    r["eval"] = ev;
    rows.push_back(r);
  }
  out.checks.push_back(check_le("ideal:max_late_deviation_from_cos_phi_over_L", worst, tol));
  double drift = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) drift = std::max(drift, rows[i]["late"]["drift"].get<double>());
  out.checks.push_back(check_le("ideal:max_late_time_drift", drift, kMaxDrift));

  if (c.get<bool>("oracle")) {
    int dim = 0;
    const auto ora = null_space_values(ch, diss, phases, &dim);
    double vs_formula = 0.0, vs_traj = 0.0;
    for (std::size_t i = 0; i < phases.size(); ++i) {
      rows[i]["null_space"] = ora[i];
      vs_formula = std::max(vs_formula, std::abs(ora[i] - symmetry::predicted_phase_curve(L, phases[i])));
      vs_traj = std::max(vs_traj, std::abs(ora[i] - late[i]));
    }
    out.report["null_space_dimension"] = dim;
    out.checks.push_back(check_le("oracle:null_space_vs_cos_phi_over_L", vs_formula, 1e-8));
    out.checks.push_back(check_le("oracle:trajectories_vs_null_space", vs_traj, tol));
  }
  out.report["phases"] = rows;
  out.report["M"] = c.M;
  out.report["duration_us"] = c.duration;
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(te));
  out.seeds = seeds.used();
  return out;
}

// ---------------------------------------------------------------------------
// floquet_calibrate

inline ScenarioOutput run_floquet_calibrate(const ExperimentConfig& c, const RunOptions&) {
  ScenarioOutput out;
  out.scenario = c.scenario;
  const auto dev = chain::device_from_json(c.at("device"));
  chain::FitOptions fo;
  fo.dt = c.get<double>("fit_dt_us");
  const auto tol = c.at("tolerance");
  const double gap_tol = tol.value("fit_gap", 0.05);
  auto bond_json = [](const chain::CouplingEstimate& e) {
    return json{{"bond", {e.j, e.k}},
                {"fit_over_2pi_MHz", e.fit / kTwoPi},
                {"bessel_over_2pi_MHz", e.bessel / kTwoPi},
                {"relative_gap", e.relative_gap()},
                {"amplitude", e.detail.amplitude},
                {"duration_us", e.detail.duration}};
  };

  // single-tone pairs at the two modulation frequencies
  const auto tc = c.at("tone_checks");
  json tones = json::array();
  for (double nu : tc.at("nu_over_2pi_MHz").get<std::vector<double>>()) {
    chain::FloquetDeviceSpec p;
    p.L = 2;
    p.omega = {4330.0 * kTwoPi, (4330.0 + nu) * kTwoPi};
    p.tones = {{{tc.value("eps_over_nu", 1.84) * nu * kTwoPi, nu * kTwoPi, 0.0}}, {}};
    p.g = {tc.value("g_over_2pi_MHz", 11.0) * kTwoPi};
    const auto e = chain::estimate_bond(p, 1, fo);
    json j = bond_json(e);
    j["nu_over_2pi_MHz"] = nu;
    tones.push_back(j);
    out.checks.push_back(check_le("single_tone_" + format_double(nu) + "MHz:fit_vs_bessel", e.relative_gap(), gap_tol));
  }
  out.report["tone_checks"] = tones;

  const auto ec = chain::effective_couplings(dev, fo);
  json bonds = json::array();
  for (const auto& e : ec.nn) {
    bonds.push_back(bond_json(e));
    out.checks.push_back(check_le("device_bond_" + std::to_string(e.j) + "_" + std::to_string(e.k) + ":fit_vs_bessel",
                                  e.relative_gap(), gap_tol));
  }
  out.report["device_bonds"] = bonds;
  std::vector<double> nnn;
  for (double x : ec.nnn_bessel) nnn.push_back(x / kTwoPi);
  out.report["nnn_bessel_over_2pi_MHz"] = nnn;
  out.documents.push_back({"effective_chain.json", chain::to_json(ec.chain)});

  const auto tb = c.at("nnn_testbed");
  const double T = tb.value("duration_us", 2.0);
  const double ratio = tol.value("suppression_ratio", 0.5);
  json nj = json::array();
  for (int first : tb.at("suppressed_first").get<std::vector<int>>()) {
    const auto bed = chain::nnn_testbed(dev, first);
    const double on = chain::nnn_suppression_metric(bed, T, fo.dt), off = chain::nnn_suppression_metric(bed.without_modulation(), T, fo.dt);
    nj.push_back({{"pair", {first, first + 2}}, {"modulated", on}, {"unmodulated", off}});
    out.checks.push_back(check_le("nnn_" + std::to_string(first) + "_" + std::to_string(first + 2) + ":modulated_over_unmodulated",
                                  on / off, ratio, "modulated " + format_double(on) + ", unmodulated " + format_double(off)));
  }
  for (int first : tb.value("retained_first", std::vector<int>{})) {
    const double on = chain::nnn_suppression_metric(chain::nnn_testbed(dev, first), T, fo.dt);
    nj.push_back({{"pair", {first, first + 2}}, {"modulated", on}, {"retained", true}});
    out.checks.push_back(record("nnn_" + std::to_string(first) + "_" + std::to_string(first + 2) + ":retained_transfer", on));
  }
  out.report["nnn_testbed"] = nj;
  out.report["device"] = chain::to_json(dev);
  return out;
}

// ---------------------------------------------------------------------------
// symmetry_check

inline ScenarioOutput run_symmetry_check(const ExperimentConfig& c, const RunOptions&) {
  ScenarioOutput out;
  out.scenario = c.scenario;
  const double J = c.get<double>("J_over_2pi_MHz") * kTwoPi, gamma = c.get<double>("gamma_per_us");
  const auto tol = c.at("tolerance");
  const double ctol = tol.value("commutator", 1e-10);
  for (int L : c.get<std::vector<int>>("L_values")) {
    const std::string tag = "L" + std::to_string(L);
    const int l = (L - 1) / 2;
    const auto ch = chain::ChainSpec::uniform(L, J, 0.0);
    const auto h = chain::xx_hamiltonian(ch);
    const auto jumps = chain::center_pump_loss(L, gamma, gamma);
    json r = {{"L", L}};
    json recs = json::array();
    symmetry::Classifier cl;
    bool validated = false;
    try {
      cl = symmetry::build_C(L, h, jumps);
      validated = true;
    } catch (const ValidationError& e) {
      r["error"] = e.what();
    }
    for (const auto& rc : validated ? cl.records : std::vector<symmetry::CandidateRecord>{})
      recs.push_back({{"name", rc.name}, {"hermitian", rc.hermitian}, {"comm_C2_H", rc.comm_h}, {"comm_C2_jumps", rc.comm_jumps},
                      {"passed", rc.passed}});
    r["candidates"] = recs;
    out.checks.push_back({tag + ":classifier_validates", validated, validated ? 1.0 : 0.0, 1.0, validated ? cl.chosen : "none", false});
    if (!validated) {
      out.report[tag] = r;
      continue;
    }
    r["chosen"] = cl.chosen;
    double comm = 0.0;
    for (const auto& rc : cl.records)
      if (rc.name == cl.chosen) comm = std::max(rc.comm_h, rc.comm_jumps);
    out.checks.push_back(check_le(tag + ":max_commutator_norm", comm, ctol));

    const core::LindbladModel lm{core::Hamiltonian(h), jumps};
    const auto ns = core::steady_states(core::liouvillian_matrix(lm));
    r["null_space_dimension"] = ns.dimension();
    out.checks.push_back(check_ge(tag + ":null_space_dimension", ns.dimension(), l + 1));

    // equal-weight superposition over the phi_eta representatives
    CVector v = CVector::Zero(qsteady::dimension_of(L));
    for (int e = 0; e <= l; ++e) v += symmetry::phi_eta_state(L, e).amplitudes();
    const auto psi0 = StateVector::normalized(L, v);
    const auto sp = symmetry::sector_projectors(cl);
    const long n = c.get<long>("n_samples");
    const long sub = std::max(1L, long(std::ceil(c.duration / double(n) / 1e-3)));
    const auto ev = core::evolve_density(lm, core::DensityOperator::pure(psi0), core::TimeGrid::spanning(c.duration, n, sub));
    const auto w0 = symmetry::sector_weights(sp, ev.states.front());
    double drift = 0.0;
    for (const auto& rho : ev.states) {
      const auto w = symmetry::sector_weights(sp, rho);
      for (std::size_t e = 0; e < w.weights.size(); ++e) drift = std::max(drift, std::abs(w.weights[e] - w0.weights[e]));
    }
    r["initial_sector_weights"] = w0.weights;
    r["sector_weight_drift"] = drift;
    out.checks.push_back(check_le(tag + ":sector_weight_drift", drift, tol.value("drift", 1e-6)));

    // asymmetric couplings must show up as a broken symmetry
    auto broken = ch;
    broken.J.front() *= 1.0 + c.get<double>("asymmetry");
    const auto cands = symmetry::classifier_candidates(L);
    double bc = 0.0;
    for (const auto& [name, op] : cands)
      if (name == cl.chosen) bc = symmetry::check_candidate(name, op, chain::xx_hamiltonian(broken), jumps).comm_h;
    r["asymmetric_commutator"] = bc;
    out.checks.push_back(check_ge(tag + ":asymmetric_chain_flagged", bc, tol.value("broken", 1e-6)));
    out.report[tag] = r;
  }
  return out;
}

// ---------------------------------------------------------------------------

inline ScenarioOutput run_scenario(const ExperimentConfig& c, const RunOptions& o = {}) {
  switch (c.scenario) {
    case Scenario::SingleQubit: return run_single_qubit(c, o);
    case Scenario::QuantumWalk: return run_quantum_walk(c, o);
    case Scenario::NineChain: return run_nine_chain(c, o);
    case Scenario::FiveChainPhaseSweep: return run_phase_sweep(c, o);
    case Scenario::FloquetCalibrate: return run_floquet_calibrate(c, o);
    case Scenario::SymmetryCheck: return run_symmetry_check(c, o);
  }
  throw InvalidArgument("unknown scenario");
}

}  // namespace qsteady::xprun
