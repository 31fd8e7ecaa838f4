#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qsteady/core/evolution.hpp"
#include "qsteady/noise/philox.hpp"

namespace qsteady::chain {

using core::Axis;
using core::Jump;
using core::LinearOperator;

/// Static chain: NN couplings J (L-1) and NNN couplings J2 (L-2), rad/us.
struct ChainSpec {
  int L = 1;
  std::vector<double> J;
  std::vector<double> J2;

  static ChainSpec uniform(int L, double j, double j2 = 0.0) {
    return {L, std::vector<double>(std::size_t(std::max(L - 1, 0)), j), std::vector<double>(std::size_t(std::max(L - 2, 0)), j2)};
  }

  void validate() const {
    require(L >= 1, "chain: L must be >= 1");
    require(J.size() == std::size_t(std::max(L - 1, 0)), "chain: J must have L-1 entries");
    require(J2.empty() || J2.size() == std::size_t(std::max(L - 2, 0)), "chain: J2 must have L-2 entries or be empty");
  }

  bool odd() const { return L % 2 == 1; }
  int center() const { return (L + 1) / 2; }

  /// Palindromic couplings, J_i = J_{L-i} and J2_i = J2_{L-1-i}, within tol.
  bool symmetric(double tol = 1e-12) const {
    validate();
    for (std::size_t i = 0; i < J.size(); ++i)
      if (std::abs(J[i] - J[J.size() - 1 - i]) > tol) return false;
    for (std::size_t i = 0; i < J2.size(); ++i)
      if (std::abs(J2[i] - J2[J2.size() - 1 - i]) > tol) return false;
    return true;
  }
};

/// sigma_j^+ sigma_k^- + sigma_j^- sigma_k^+
inline LinearOperator hopping(int j, int k, int L) {
  return core::pauli_string({{j, Axis::Plus}, {k, Axis::Minus}}, L) +
         core::pauli_string({{j, Axis::Minus}, {k, Axis::Plus}}, L);
}

/// i (sigma_j^+ sigma_k^- - sigma_j^- sigma_k^+), the quadrature partner of hopping().
inline LinearOperator hopping_quadrature(int j, int k, int L) {
  SparseMatrix m = kI * (core::pauli_string({{j, Axis::Plus}, {k, Axis::Minus}}, L).matrix() -
                         core::pauli_string({{j, Axis::Minus}, {k, Axis::Plus}}, L).matrix());
  return LinearOperator(std::move(m), true);
}

inline LinearOperator xx_hamiltonian(const ChainSpec& spec) {
  spec.validate();
  const Index dim = qsteady::dimension_of(spec.L);
  SparseMatrix h(dim, dim);
  for (int i = 1; i < spec.L; ++i)
    if (spec.J[std::size_t(i - 1)] != 0.0) h += cplx(spec.J[std::size_t(i - 1)]) * hopping(i, i + 1, spec.L).matrix();
  for (int i = 1; i + 2 <= spec.L && !spec.J2.empty(); ++i)
    if (spec.J2[std::size_t(i - 1)] != 0.0) h += cplx(spec.J2[std::size_t(i - 1)]) * hopping(i, i + 2, spec.L).matrix();
  return LinearOperator(std::move(h), true);
}

/// Relaxation sigma^- at 1/T1 and pure dephasing sigma^z at 1/(2 Tphi) per
/// qubit; infinite times contribute nothing.
inline std::vector<Jump> decoherence_jumps(const std::vector<double>& T1, const std::vector<double>& Tphi, int L) {
  require(T1.size() == std::size_t(L) && Tphi.size() == std::size_t(L), "decoherence_jumps: need one T1 and Tphi per qubit");
  std::vector<Jump> out;
  for (int j = 1; j <= L; ++j) {
    const double t1 = T1[std::size_t(j - 1)], tp = Tphi[std::size_t(j - 1)];
    require(t1 > 0.0 && tp > 0.0, "decoherence_jumps: times must be positive");
    if (std::isfinite(t1)) out.push_back({core::single(Axis::Minus, j, L), 1.0 / t1});
    if (std::isfinite(tp)) out.push_back({core::single(Axis::Z, j, L), 1.0 / (2.0 * tp)});
  }
  return out;
}

inline std::vector<Jump> decoherence_jumps(double T1, double Tphi, int L) {
  return decoherence_jumps(std::vector<double>(std::size_t(L), T1), std::vector<double>(std::size_t(L), Tphi), L);
}

/// Center-site pump and loss, sigma^+ at gamma_plus and sigma^- at gamma_minus.
inline std::vector<Jump> center_pump_loss(int L, double gamma_plus, double gamma_minus, int site = 0) {
  const int c = site > 0 ? site : (L + 1) / 2;
  return {{core::single(Axis::Plus, c, L), gamma_plus}, {core::single(Axis::Minus, c, L), gamma_minus}};
}

/// Center-site pump/loss plus optional per-qubit T1 and Tphi (us; infinity
/// switches a channel off).
struct DissipationSpec {
  int site = 0;  // 0 means the center
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
  std::vector<double> T1;
  std::vector<double> Tphi;

  bool has_decoherence() const { return !T1.empty() || !Tphi.empty(); }

  std::vector<Jump> jumps(int L, bool decoherence = true) const {
    require(gamma_plus >= 0.0 && gamma_minus >= 0.0, "dissipation: rates must be non-negative");
    std::vector<Jump> out;
    for (auto& j : center_pump_loss(L, gamma_plus, gamma_minus, site))
      if (j.rate > 0.0) out.push_back(std::move(j));
    if (decoherence && has_decoherence()) {
      const double inf = std::numeric_limits<double>::infinity();
      auto t1 = T1.empty() ? std::vector<double>(std::size_t(L), inf) : T1;
      auto tp = Tphi.empty() ? std::vector<double>(std::size_t(L), inf) : Tphi;
      for (auto& j : decoherence_jumps(t1, tp, L)) out.push_back(std::move(j));
    }
    return out;
  }
};

/// Unengineered device stand-in: NN couplings J (1 + d u_i) with u_i uniform
/// in [-1, 1) from the disorder stream of `seed`, and uniform NNN j2.
inline ChainSpec disordered_baseline(int L, double j, double disorder, double j2, std::uint64_t seed) {
  require(disorder >= 0.0 && disorder < 1.0, "baseline: disorder fraction must be in [0, 1)");
  noise::PhiloxStream rng(seed, noise::stream::kDisorder);
  ChainSpec s = ChainSpec::uniform(L, j, j2);
  for (auto& x : s.J) x = j * (1.0 + disorder * (2.0 * rng.uniform() - 1.0));
  return s;
}

}  // namespace qsteady::chain
