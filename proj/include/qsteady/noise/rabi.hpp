#pragma once

#include <cmath>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "qsteady/core/evolution.hpp"

namespace qsteady::noise {

/// P_e(T) under H = (Omega/2)(cos th sx + sin th sy) from |g>, one RK4 run
/// per duration with dt <= max_dt.
inline std::vector<double> rabi_curve(double omega, const std::vector<double>& durations, double theta = 0.0,
                                      double max_dt = 1e-3) {
  using namespace core;
  const Hamiltonian h(linear_combination({{0.5 * omega * std::cos(theta), single(Axis::X, 1, 1)},
                                          {0.5 * omega * std::sin(theta), single(Axis::Y, 1, 1)}},
                                         2));
  std::vector<double> pe;
  pe.reserve(durations.size());
  for (double T : durations) {
    require(T >= 0.0, "rabi_curve: durations must be non-negative");
    if (T == 0.0) {
      pe.push_back(0.0);
      continue;
    }
    const long n = std::max(1L, long(std::ceil(T / max_dt)));
    const auto out = evolve_state(h, StateVector::ground(1), TimeGrid{0.0, T / double(n), n, n});
    pe.push_back(std::norm(out.states.back()[1]));
  }
  return pe;
}

struct RabiFit {
  double omega = 0.0;  // Rabi frequency, rad/us
  double rms = 0.0;
};

/// Least-squares fit of sin^2(Omega T / 2): coarse scan for the basin, then
/// Brent on the residual.
inline RabiFit fit_rabi(const std::vector<double>& durations, const std::vector<double>& pe, double omega_min,
                        double omega_max) {
  require(durations.size() == pe.size() && durations.size() >= 3, "fit_rabi: need at least three points");
  require(0.0 < omega_min && omega_min < omega_max, "fit_rabi: bad search bracket");
  auto cost = [&](double w) {
    double s = 0.0;
    for (std::size_t k = 0; k < pe.size(); ++k) {
      const double r = pe[k] - std::pow(std::sin(0.5 * w * durations[k]), 2);
      s += r * r;
    }
    return s;
  };
  const int n_scan = 2000;
  double best = omega_min, best_cost = cost(omega_min);
  for (int k = 1; k <= n_scan; ++k) {
    const double w = omega_min + (omega_max - omega_min) * k / n_scan;
    const double c = cost(w);
    if (c < best_cost) best = w, best_cost = c;
  }
  const double step = (omega_max - omega_min) / n_scan;
  const auto r = boost::math::tools::brent_find_minima(cost, std::max(omega_min, best - step),
                                                       std::min(omega_max, best + step), 52);
  return {r.first, std::sqrt(r.second / double(pe.size()))};
}

/// Pulse amplitude and noise strength are tied by Omega_pulse = sqrt(gamma/dt);
/// the pulse coefficient is half the Rabi frequency.
inline double gamma_from_rabi(double rabi_omega, double dt_section) { return std::pow(0.5 * rabi_omega, 2) * dt_section; }
inline double rabi_from_gamma(double gamma, double dt_section) { return 2.0 * std::sqrt(gamma / dt_section); }

}  // namespace qsteady::noise
