#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qsteady/core/states.hpp"

namespace qsteady::symmetry {

using core::StateVector;

/// |phi_eta> = prod_{k=1}^{eta} b^dag_{k,(-)^k} |g...g>, with
/// b^dag_{k,+-} = (s+_{l-k+1} +- s+_{L-l+k}) / sqrt 2.
inline StateVector phi_eta_state(int L, int eta) {
  require(L >= 3 && L % 2 == 1, "phi_eta_state: L must be odd and >= 3");
  const int l = (L - 1) / 2;
  require(eta >= 0 && eta <= l, "phi_eta_state: eta must be in 0..l");
  CVector v = CVector::Zero(qsteady::dimension_of(L));
  v(0) = 1.0;
  for (int k = 1; k <= eta; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const std::uint64_t a = site_mask(L, l - k + 1), b = site_mask(L, L - l + k);
    CVector w = CVector::Zero(v.size());
    for (Index i = 0; i < v.size(); ++i) {
      if (v(i) == cplx(0.0)) continue;
      const auto bits = std::uint64_t(i);
      if (!(bits & a)) w(Index(bits | a)) += v(i) / std::sqrt(2.0);
      if (!(bits & b)) w(Index(bits | b)) += sign * v(i) / std::sqrt(2.0);
    }
    v = w;
  }
  return StateVector::normalized(L, std::move(v));
}

/// (|e,g> + e^{i phi} |g,e>) / sqrt 2 on sites (center-1, center+1), ground elsewhere.
inline StateVector bell_chain_state(int L, double phi) {
  require(L >= 3 && L % 2 == 1, "bell_chain_state: L must be odd and >= 3");
  const int c = (L + 1) / 2;
  CVector v = CVector::Zero(qsteady::dimension_of(L));
  v(Index(site_mask(L, c - 1))) = 1.0 / std::sqrt(2.0);
  v(Index(site_mask(L, c + 1))) = std::polar(1.0 / std::sqrt(2.0), phi);
  return StateVector(L, std::move(v));
}

// ---------------------------------------------------------------------------
// Gates

enum class GateKind { Rz, X, HalfSwap, ISwap };

struct Gate {
  GateKind kind = GateKind::X;
  int a = 1;
  int b = 0;
  double theta = 0.0;

  static Gate rz(double theta, int site) { return {GateKind::Rz, site, 0, theta}; }
  static Gate x(int site) { return {GateKind::X, site, 0, 0.0}; }
  static Gate half_swap(int a, int b) { return {GateKind::HalfSwap, a, b, 0.0}; }
  static Gate iswap(int a, int b) { return {GateKind::ISwap, a, b, 0.0}; }
};

/// Phase of |g_a e_b> produced by x(a) then half_swap(a, b) from |g g>.
inline constexpr double kHalfSwapPhase = std::numbers::pi / 2;

/// Local unitary: 2x2 on (g, e) of `a`, or 4x4 on |g_a g_b>, |g_a e_b>, |e_a g_b>, |e_a e_b>.
inline CMatrix gate_matrix(const Gate& g) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (g.kind) {
    case GateKind::Rz: {  // exp(-i sz theta / 2), sz = diag(-1, 1)
      CMatrix m = CMatrix::Zero(2, 2);
      m(0, 0) = std::polar(1.0, g.theta / 2);
      m(1, 1) = std::polar(1.0, -g.theta / 2);
      return m;
    }
    case GateKind::X: {
      CMatrix m = CMatrix::Zero(2, 2);
      m(0, 1) = m(1, 0) = 1.0;
      return m;
    }
    case GateKind::HalfSwap: {  // sqrt(iSWAP)
      CMatrix m = CMatrix::Identity(4, 4);
      m(1, 1) = m(2, 2) = r;
      m(1, 2) = m(2, 1) = kI * r;
      return m;
    }
    case GateKind::ISwap: {
      CMatrix m = CMatrix::Identity(4, 4);
      m(1, 1) = m(2, 2) = 0.0;
      m(1, 2) = m(2, 1) = kI;
      return m;
    }
  }
  throw InvalidArgument("unknown gate");
}

inline bool two_qubit(const Gate& g) { return g.kind == GateKind::HalfSwap || g.kind == GateKind::ISwap; }

inline StateVector apply_gate(const Gate& g, const StateVector& psi) {
  const int L = psi.qubits();
  require(g.a >= 1 && g.a <= L, "apply_gate: site out of range");
  const CMatrix u = gate_matrix(g);
  const CVector& x = psi.amplitudes();
  CVector y = CVector::Zero(x.size());
  const std::uint64_t ma = site_mask(L, g.a);
  if (!two_qubit(g)) {
    for (Index i = 0; i < x.size(); ++i) {
      const auto bits = std::uint64_t(i);
      const int s = (bits & ma) ? 1 : 0;
      for (int t = 0; t < 2; ++t) y(Index(t ? (bits | ma) : (bits & ~ma))) += u(t, s) * x(i);
    }
  } else {
    require(g.b >= 1 && g.b <= L && g.b != g.a, "apply_gate: two-qubit gate needs distinct valid sites");
    const std::uint64_t mb = site_mask(L, g.b);
    for (Index i = 0; i < x.size(); ++i) {
      const auto bits = std::uint64_t(i);
      const int s = ((bits & ma) ? 2 : 0) + ((bits & mb) ? 1 : 0);
      const std::uint64_t rest = bits & ~ma & ~mb;
      for (int t = 0; t < 4; ++t) y(Index(rest | ((t & 2) ? ma : 0) | ((t & 1) ? mb : 0))) += u(t, s) * x(i);
    }
  }
  return StateVector::normalized(L, std::move(y));
}

/// x on center-1, half_swap across (center-1, center+1), then rz on center+1
/// to turn the half-swap phase into phi.
inline std::vector<Gate> bell_prep_gates(int L, double phi) {
  require(L >= 3 && L % 2 == 1, "bell_prep_circuit: L must be odd and >= 3");
  const int c = (L + 1) / 2;
  return {Gate::x(c - 1), Gate::half_swap(c - 1, c + 1), Gate::rz(kHalfSwapPhase - phi, c + 1)};
}

inline StateVector bell_prep_circuit(int L, double phi) {
  StateVector psi = StateVector::ground(L);
  for (const auto& g : bell_prep_gates(L, phi)) psi = apply_gate(g, psi);
  return psi;
}

// ---------------------------------------------------------------------------
// Predictions

struct Unsupported : Error {
  using Error::Error;
};

/// Late-time <s^z_1 s^z_L>: 1/L in sector 0, (l-4)/(L l) in sector 1.
inline double predicted_steady_value(int L, int eta) {
  require(L >= 3 && L % 2 == 1, "predicted_steady_value: L must be odd and >= 3");
  const double l = (L - 1) / 2.0;
  if (eta == 0) return 1.0 / L;
  if (eta == 1) return (l - 4.0) / (L * l);
  throw Unsupported("predicted_steady_value: no closed form for eta >= 2");
}

/// Sector-weighted value for |Psi(phi)>; cos(phi)/5 at L = 5.
inline double predicted_phase_curve(int L, double phi) {
  const double c = std::pow(std::cos(phi / 2), 2), s = std::pow(std::sin(phi / 2), 2);
  return c * predicted_steady_value(L, 0) + s * predicted_steady_value(L, 1);
}

}  // namespace qsteady::symmetry
