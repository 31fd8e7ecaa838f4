#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "qsteady/chain/spec.hpp"

namespace qsteady::chain {

/// One flux tone on a qubit: detuning eps sin(nu t + phase), eps and nu in rad/us.
struct Tone {
  double eps = 0.0;
  double nu = 0.0;
  double phase = 0.0;

  double ratio() const { return eps / nu; }
};

struct FitFailure : NumericalError {
  using NumericalError::NumericalError;
};

inline bool same_frequency(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Lab-frame device. Sites are 1-based in the accessors; vectors are 0-based.
struct FloquetDeviceSpec {
  int L = 1;
  std::vector<double> omega;             // idle frequencies, rad/us (L)
  std::vector<std::vector<Tone>> tones;  // per qubit (L)
  std::vector<double> g;                 // bare NN, rad/us (L-1)
  std::vector<double> g2;                // bare NNN, rad/us (L-2)

  void validate() const {
    require(L >= 2, "device: need at least two qubits");
    require(omega.size() == std::size_t(L) && tones.size() == std::size_t(L), "device: need one idle frequency and tone list per qubit");
    require(g.size() == std::size_t(L - 1), "device: g must have L-1 entries");
    require(g2.empty() || g2.size() == std::size_t(L - 2), "device: g2 must have L-2 entries or be empty");
    for (int j = 1; j <= L; ++j)
      for (const auto& t : tones_at(j)) require(t.nu > 0.0 && t.eps >= 0.0, "device: tones need nu > 0 and eps >= 0");
  }

  /// Every tone sits on a detuning to an adjacent qubit. Not part of
  /// validate(): a sub-device may cut away the neighbour a tone serves.
  void check_resonance() const {
    validate();
    for (int j = 1; j <= L; ++j)
      for (const auto& t : tones_at(j)) {
        bool hit = false;
        for (int k : {j - 1, j + 1})
          if (k >= 1 && k <= L) hit = hit || same_frequency(t.nu, std::abs(idle(j) - idle(k)));
        require(hit, "device: tone on qubit " + std::to_string(j) + " does not match an adjacent detuning");
      }
  }

  double idle(int j) const { return omega[std::size_t(j - 1)]; }
  const std::vector<Tone>& tones_at(int j) const { return tones[std::size_t(j - 1)]; }
  double nn(int j) const { return g[std::size_t(j - 1)]; }
  double nnn(int j) const { return g2.empty() ? 0.0 : g2[std::size_t(j - 1)]; }

  std::vector<int> modulated_sites() const {
    std::vector<int> out;
    for (int j = 1; j <= L; ++j)
      if (!tones_at(j).empty()) out.push_back(j);
    return out;
  }

  /// Modulated qubits are exactly the even-indexed ones.
  bool even_scheme() const {
    for (int j = 1; j <= L; ++j)
      if (tones_at(j).empty() == (j % 2 == 0)) return false;
    return true;
  }

  FloquetDeviceSpec sub_device(int first, int count) const {
    require(first >= 1 && count >= 2 && first + count - 1 <= L, "sub_device: range outside the device");
    FloquetDeviceSpec s;
    s.L = count;
    s.omega.assign(omega.begin() + first - 1, omega.begin() + first - 1 + count);
    s.tones.assign(tones.begin() + first - 1, tones.begin() + first - 1 + count);
    s.g.assign(g.begin() + first - 1, g.begin() + first + count - 2);
    if (!g2.empty() && count >= 3) s.g2.assign(g2.begin() + first - 1, g2.begin() + first + count - 3);
    return s;
  }

  FloquetDeviceSpec without_modulation() const {
    FloquetDeviceSpec s = *this;
    for (auto& t : s.tones) t.clear();
    return s;
  }

  FloquetDeviceSpec without_nn() const {
    FloquetDeviceSpec s = *this;
    std::fill(s.g.begin(), s.g.end(), 0.0);
    return s;
  }
};

namespace detail {

inline void add_bond(SparseMatrix& h0, std::vector<core::DriveTerm>& drives, double coupling, int j, int k, double delta, int L) {
  if (coupling == 0.0) return;
  if (delta == 0.0) {
    h0 += cplx(coupling) * hopping(j, k, L).matrix();
    return;
  }
  drives.push_back({coupling * hopping(j, k, L), [delta](double t) { return std::cos(delta * t); }});
  drives.push_back({coupling * hopping_quadrature(j, k, L), [delta](double t) { return std::sin(delta * t); }});
}

}  // namespace detail

/// Frame rotating at each idle frequency:
/// H(t) = sum_j sum_tones eps sin(nu t + phi) n_j + sum_<jk> g (e^{i D t} s_j^+ s_k^- + h.c.), D = w_j - w_k.
inline core::Hamiltonian lab_frame(const FloquetDeviceSpec& dev) {
  dev.validate();
  const int L = dev.L;
  const Index dim = qsteady::dimension_of(L);
  SparseMatrix h0(dim, dim);
  std::vector<core::DriveTerm> drives;
  for (int j = 1; j <= L; ++j)
    for (const auto& t : dev.tones_at(j)) {
      if (t.eps == 0.0) continue;
      drives.push_back({core::single(Axis::N, j, L), [t](double s) { return t.eps * std::sin(t.nu * s + t.phase); }});
    }
  for (int j = 1; j < L; ++j) detail::add_bond(h0, drives, dev.nn(j), j, j + 1, dev.idle(j) - dev.idle(j + 1), L);
  for (int j = 1; j + 2 <= L; ++j) detail::add_bond(h0, drives, dev.nnn(j), j, j + 2, dev.idle(j) - dev.idle(j + 2), L);
  return core::Hamiltonian(LinearOperator(std::move(h0), true), std::move(drives));
}

inline LinearOperator lab_frame_hamiltonian(const FloquetDeviceSpec& dev, double t) { return lab_frame(dev).at(t); }

// ---------------------------------------------------------------------------
// First-sideband estimate

/// Bond (j, k): tones are grouped by frequency; the relative phase modulation
/// at frequency f has depth R_f = |sum_j x e^{i phi} - sum_k x e^{i phi}|.
/// A static bond keeps g prod J0(R_f); a detuned bond needs a tone at |D| and
/// gets g |J1(R_res)| prod_{other} J0(R_f); otherwise zero.
inline double bessel_coupling(const FloquetDeviceSpec& dev, int j, int k, double bare) {
  struct Group {
    double nu;
    cplx c;
  };
  std::vector<Group> groups;
  auto add = [&](const Tone& t, double sign) {
    for (auto& gr : groups)
      if (same_frequency(gr.nu, t.nu)) {
        gr.c += sign * t.ratio() * std::polar(1.0, t.phase);
        return;
      }
    groups.push_back({t.nu, sign * t.ratio() * std::polar(1.0, t.phase)});
  };
  for (const auto& t : dev.tones_at(j)) add(t, 1.0);
  for (const auto& t : dev.tones_at(k)) add(t, -1.0);
  const double delta = std::abs(dev.idle(j) - dev.idle(k));
  if (delta == 0.0) {
    double p = bare;
    for (const auto& gr : groups) p *= std::cyl_bessel_j(0.0, std::abs(gr.c));
    return p;
  }
  double p = 0.0;
  bool resonant = false;
  for (const auto& gr : groups)
    if (!resonant && same_frequency(gr.nu, delta)) {
      resonant = true;
      p = std::abs(bare * std::cyl_bessel_j(1.0, std::abs(gr.c)));
    }
  if (!resonant) return 0.0;
  for (const auto& gr : groups)
    if (!same_frequency(gr.nu, delta)) p *= std::cyl_bessel_j(0.0, std::abs(gr.c));
  return std::abs(p);
}

// ---------------------------------------------------------------------------
// Numerical estimate

struct FitOptions {
  double dt = 1e-5;             // us, lab-frame RK4 step
  double min_duration = 0.1;    // us
  double max_duration = 2.0;    // us
  double min_transfer = 0.02;   // below this no oscillation is detected
};

struct SwapFit {
  double omega = 0.0;      // oscillation frequency of P(t) = A sin^2(omega t)
  double amplitude = 0.0;  // A
  double coupling = 0.0;   // omega sqrt(A)
  double rms = 0.0;
  double duration = 0.0;
};

/// Fits P(t) = A sin^2(w t). For each w the best A is linear; the scan finds
/// the basin and Brent polishes it.
inline SwapFit fit_swap(const std::vector<double>& t, const std::vector<double>& p, double w_min, double w_max) {
  require(t.size() == p.size() && t.size() >= 4, "fit_swap: need at least four samples");
  require(0.0 < w_min && w_min < w_max, "fit_swap: bad bracket");
  auto best_a = [&](double w) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double s = std::pow(std::sin(w * t[i]), 2);
      num += s * p[i];
      den += s * s;
    }
    return den > 0.0 ? num / den : 0.0;
  };
  auto cost = [&](double w) {
    const double a = best_a(w);
    double c = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) c += std::pow(p[i] - a * std::pow(std::sin(w * t[i]), 2), 2);
    return c;
  };
  const int n_scan = 4000;
  double best = w_min, best_cost = cost(w_min);
  for (int k = 1; k <= n_scan; ++k) {
    const double w = w_min + (w_max - w_min) * k / n_scan;
    const double c = cost(w);
    if (c < best_cost) best = w, best_cost = c;
  }
  const double step = (w_max - w_min) / n_scan;
  const auto r = boost::math::tools::brent_find_minima(cost, std::max(w_min, best - step), std::min(w_max, best + step), 52);
  SwapFit f;
  f.omega = r.first;
  f.amplitude = best_a(r.first);
  f.coupling = f.omega * std::sqrt(std::max(f.amplitude, 0.0));
  f.rms = std::sqrt(r.second / double(t.size()));
  return f;
}

/// Population on the second site of a two-site device started in |e g>.
inline std::vector<double> transfer_curve(const FloquetDeviceSpec& pair, double duration, long n_samples, double dt,
                                          std::vector<double>* times = nullptr) {
  require(pair.L == 2, "transfer_curve: need a two-site device");
  const long sub = std::max(1L, long(std::ceil(duration / double(n_samples) / dt)));
  const auto grid = core::TimeGrid::spanning(duration, n_samples, sub);
  const auto out = core::evolve_state(lab_frame(pair), core::StateVector::basis(2, site_mask(2, 1)), grid);
  const auto n2 = core::single(Axis::N, 2, 2);
  std::vector<double> p;
  p.reserve(out.states.size());
  for (const auto& s : out.states) p.push_back(core::expectation(n2, s));
  if (times) *times = out.times;
  return p;
}

struct CouplingEstimate {
  int j = 0, k = 0;
  double bessel = 0.0;  // rad/us
  double fit = 0.0;     // rad/us
  SwapFit detail;

  double relative_gap() const { return std::abs(bessel - fit) / std::abs(fit); }
};

/// Both estimates for NN bond (j, j+1).
inline CouplingEstimate estimate_bond(const FloquetDeviceSpec& dev, int j, const FitOptions& opt = {}) {
  require(j >= 1 && j < dev.L, "estimate_bond: bond index out of range");
  CouplingEstimate e;
  e.j = j;
  e.k = j + 1;
  e.bessel = bessel_coupling(dev, j, j + 1, dev.nn(j));
  const auto pair = dev.sub_device(j, 2);
  const double g = std::abs(dev.nn(j));
  require(g > 0.0, "estimate_bond: bare coupling is zero");
  const double T = e.bessel > 0.0 ? std::clamp(2.5 * kPi / e.bessel, opt.min_duration, opt.max_duration) : opt.max_duration;
  const double w_max = 2.0 * g;
  const long n = std::max(200L, long(std::ceil(20.0 * T * w_max / kPi)));
  std::vector<double> t;
  const auto p = transfer_curve(pair, T, n, opt.dt, &t);
  if (*std::max_element(p.begin(), p.end()) < opt.min_transfer)
    throw FitFailure("no oscillation detected on bond (" + std::to_string(j) + "," + std::to_string(j + 1) + ")");
  e.detail = fit_swap(t, p, kPi / (8.0 * T), w_max);
  e.detail.duration = T;
  e.fit = e.detail.coupling;
  return e;
}

struct EffectiveCouplings {
  ChainSpec chain;  // J from the fit, J2 from the first-sideband estimate
  std::vector<CouplingEstimate> nn;
  std::vector<double> nnn_bessel;
};

inline EffectiveCouplings effective_couplings(const FloquetDeviceSpec& dev, const FitOptions& opt = {}) {
  dev.validate();
  EffectiveCouplings out;
  out.chain.L = dev.L;
  for (int j = 1; j < dev.L; ++j) {
    out.nn.push_back(estimate_bond(dev, j, opt));
    out.chain.J.push_back(out.nn.back().fit);
  }
  for (int j = 1; j + 2 <= dev.L; ++j) out.nnn_bessel.push_back(bessel_coupling(dev, j, j + 2, dev.nnn(j)));
  out.chain.J2 = out.nnn_bessel;
  return out;
}

// ---------------------------------------------------------------------------
// Amplitude solver

/// Depth that zeroes J0 for two equal anti-phase modulations, x = j_{0,1} / 2.
inline constexpr double kAntiPhaseDepth = 2.404825557695773 / 2.0;

struct SolveOptions {
  FitOptions fit;
  double tolerance = 1e-3;  // relative, on the fitted couplings
  int max_iterations = 6;
};

struct AmplitudeSolution {
  FloquetDeviceSpec device;
  EffectiveCouplings couplings;
  int iterations = 0;
  double worst_relative_error = 0.0;
};

namespace detail {

struct SiteEquation {
  int bond;   // NN bond index
  int tone;   // resonant tone on the site
  double g;   // bare coupling
};

/// Solves g_b |J1(x_rb)| prod_{t != rb} J0(x_t) = target_b on one site, x in (0, 2.3).
inline void solve_site(std::vector<Tone>& tones, const std::vector<SiteEquation>& eqs, const std::vector<double>& targets) {
  const int n = int(tones.size());
  std::vector<int> free;
  for (const auto& e : eqs) free.push_back(e.tone);
  require(std::set<int>(free.begin(), free.end()).size() == free.size(), "amplitude solver: a tone serves two bonds");
  Eigen::VectorXd x(n);
  for (int t = 0; t < n; ++t) x(t) = tones[std::size_t(t)].ratio();
  for (int f : free) x(f) = 1.0;
  const int m = int(eqs.size());
  auto residual = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd r(m);
    for (int i = 0; i < m; ++i) {
      double v = std::log(std::abs(eqs[std::size_t(i)].g) * std::cyl_bessel_j(1.0, y(eqs[std::size_t(i)].tone)));
      for (int t = 0; t < n; ++t)
        if (t != eqs[std::size_t(i)].tone) v += std::log(std::cyl_bessel_j(0.0, y(t)));
      r(i) = v - std::log(targets[std::size_t(i)]);
    }
    return r;
  };
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd r = residual(x);
    if (r.cwiseAbs().maxCoeff() < 1e-13) break;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i)
      for (int c = 0; c < m; ++c) {
        const int t = free[std::size_t(c)];
        const double y = x(t), j0 = std::cyl_bessel_j(0.0, y), j1 = std::cyl_bessel_j(1.0, y);
        jac(i, c) = t == eqs[std::size_t(i)].tone ? j0 / j1 - 1.0 / y : -j1 / j0;
      }
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-r);
    double lam = 1.0;
    for (int c = 0; c < m; ++c) {
      const double y = x(free[std::size_t(c)]) + step(c);
      if (y < 1e-6 || y > 2.3) lam = std::min(lam, 0.5 * std::min(x(free[std::size_t(c)]), 2.3 - x(free[std::size_t(c)])) / std::abs(step(c)));
    }
    for (int c = 0; c < m; ++c) x(free[std::size_t(c)]) += lam * step(c);
  }
  if (residual(x).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericalError("amplitude solver: target coupling out of reach of the first Bessel lobe");
  for (int t = 0; t < n; ++t) tones[std::size_t(t)].eps = x(t) * tones[std::size_t(t)].nu;
}

}  // namespace detail

/// Adjusts eps on every modulated qubit so that every NN bond reaches
/// `target` (rad/us) in the lab-frame fit. Each bond needs exactly one
/// modulated end carrying a tone at its detuning.
inline AmplitudeSolution solve_amplitudes(const FloquetDeviceSpec& dev0, double target, const SolveOptions& opt = {}) {
  dev0.validate();
  require(target > 0.0, "amplitude solver: target must be positive");
  FloquetDeviceSpec dev = dev0;
  struct Owned {
    int site;
    std::vector<detail::SiteEquation> eqs;
  };
  std::vector<Owned> owners;
  std::vector<int> owner_of(std::size_t(dev.L - 1), -1);
  for (int s : dev.modulated_sites()) {
    Owned o{s, {}};
    for (int b : {s - 1, s}) {
      if (b < 1 || b >= dev.L) continue;
      const double delta = std::abs(dev.idle(b) - dev.idle(b + 1));
      const auto& ts = dev.tones_at(s);
      for (std::size_t t = 0; t < ts.size(); ++t)
        if (same_frequency(ts[t].nu, delta)) {
          require(owner_of[std::size_t(b - 1)] < 0, "amplitude solver: bond " + std::to_string(b) + " is modulated from both ends");
          owner_of[std::size_t(b - 1)] = int(owners.size());
          o.eqs.push_back({b, int(t), dev.nn(b)});
          break;
        }
    }
    owners.push_back(o);
  }
  for (int b = 1; b < dev.L; ++b)
    require(owner_of[std::size_t(b - 1)] >= 0, "amplitude solver: bond " + std::to_string(b) + " has no resonant tone");

  std::vector<double> aim(std::size_t(dev.L - 1), target);
  AmplitudeSolution sol;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    for (const auto& o : owners) {
      std::vector<double> tg;
      for (const auto& e : o.eqs) tg.push_back(aim[std::size_t(e.bond - 1)]);
      detail::solve_site(dev.tones[std::size_t(o.site - 1)], o.eqs, tg);
    }
    sol.couplings = effective_couplings(dev, opt.fit);
    sol.iterations = it;
    sol.worst_relative_error = 0.0;
    for (std::size_t b = 0; b < aim.size(); ++b) {
      const double got = sol.couplings.nn[b].fit;
      sol.worst_relative_error = std::max(sol.worst_relative_error, std::abs(got - target) / target);
      aim[b] *= target / got;
    }
    if (sol.worst_relative_error <= opt.tolerance) break;
  }
  sol.device = dev;
  return sol;
}

// ---------------------------------------------------------------------------
// NNN suppression

/// Largest population reached on site 3 of a three-site device started with
/// one excitation on site 1, lab frame, sampled every `sample_dt`.
inline double nnn_suppression_metric(const FloquetDeviceSpec& dev3, double duration, double dt = 1e-5, double sample_dt = 1e-3) {
  require(dev3.L == 3, "nnn_suppression_metric: need a three-site device");
  require(duration > 0.0, "nnn_suppression_metric: duration must be positive");
  const long n = std::max(1L, long(std::ceil(duration / sample_dt)));
  const long sub = std::max(1L, long(std::ceil(duration / double(n) / dt)));
  const auto out = core::evolve_state(lab_frame(dev3), core::StateVector::basis(3, site_mask(3, 1)),
                                      core::TimeGrid::spanning(duration, n, sub));
  const auto n3 = core::single(Axis::N, 3, 3);
  double m = 0.0;
  for (const auto& s : out.states) m = std::max(m, core::expectation(n3, s));
  return std::clamp(m, 0.0, 1.0);
}

/// Three-site testbed around the NNN bond (first, first+2) with the NN
/// couplings removed, so only the direct NNN path can move population.
inline FloquetDeviceSpec nnn_testbed(const FloquetDeviceSpec& dev, int first) {
  return dev.sub_device(first, 3).without_nn();
}

// ---------------------------------------------------------------------------
// Reference device

struct DeviceDefaults {
  double g_over_2pi_mhz = 11.0;
  double g2_over_2pi_mhz = 1.0;
  double depth = kAntiPhaseDepth;  // eps / nu on every tone
};

/// Nine qubits at 4540 / 4330 / 4660 / 4330 / 4540 / ... MHz. Every even
/// qubit carries tones at both adjacent detunings (210 and 330 MHz); phases
/// pi, 0, 0, pi on Q2, Q4, Q6, Q8 put (2,4) and (6,8) in anti-phase and
/// keep (4,6) in phase.
inline FloquetDeviceSpec reference_device(const DeviceDefaults& d = {}) {
  const double mhz = kTwoPi;
  FloquetDeviceSpec dev;
  dev.L = 9;
  for (double f : {4540.0, 4330.0, 4660.0, 4330.0, 4540.0, 4330.0, 4660.0, 4330.0, 4540.0}) dev.omega.push_back(f * mhz);
  dev.tones.resize(9);
  const double phase[9] = {0, kPi, 0, 0, 0, 0, 0, kPi, 0};
  for (int j = 2; j <= 8; j += 2)
    for (double nu : {210.0, 330.0}) dev.tones[std::size_t(j - 1)].push_back({d.depth * nu * mhz, nu * mhz, phase[j - 1]});
  dev.g.assign(8, d.g_over_2pi_mhz * mhz);
  dev.g2.assign(7, d.g2_over_2pi_mhz * mhz);
  dev.check_resonance();
  return dev;
}

}  // namespace qsteady::chain
