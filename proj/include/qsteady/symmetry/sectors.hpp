#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qsteady/chain/spec.hpp"
#include "qsteady/core/states.hpp"

namespace qsteady::symmetry {

using core::Axis;
using core::LinearOperator;

/// f_k = (prod_{j<k} (-sigma^z_j)) sigma^-_k. With sigma^z = diag(-1, 1) the
/// string is (-1)^{n_j}.
struct FermionModeSet {
  int L = 0;
  std::vector<LinearOperator> f;  // f[k-1] = f_k
  static constexpr const char* kConvention = "f_k = prod_{j<k}(-sz_j) sm_k, sz = diag(-1,+1) on (g,e)";

  const LinearOperator& operator()(int k) const { return f[std::size_t(k - 1)]; }
};

inline FermionModeSet jw_modes(int L) {
  require(L >= 1, "jw_modes: L must be >= 1");
  FermionModeSet m;
  m.L = L;
  for (int k = 1; k <= L; ++k) {
    const Index dim = qsteady::dimension_of(L);
    std::vector<Eigen::Triplet<cplx>> trip;
    const std::uint64_t bit = site_mask(L, k);
    for (std::uint64_t b = 0; b < std::uint64_t(dim); ++b) {
      if (!(b & bit)) continue;
      int parity = 0;
      for (int j = 1; j < k; ++j) parity ^= int((b & site_mask(L, j)) != 0);
      trip.emplace_back(Index(b & ~bit), Index(b), parity ? -1.0 : 1.0);
    }
    SparseMatrix s(dim, dim);
    s.setFromTriplets(trip.begin(), trip.end());
    m.f.emplace_back(std::move(s), false);
  }
  return m;
}

/// max over pairs of |{f_j, f_k^dag} - delta| and |{f_j, f_k}|.
inline double car_defect(const FermionModeSet& m) {
  const Index dim = qsteady::dimension_of(m.L);
  const SparseMatrix id = LinearOperator::identity(dim).matrix();
  double worst = 0.0;
  for (int j = 1; j <= m.L; ++j)
    for (int k = 1; k <= m.L; ++k) {
      const SparseMatrix& a = m(j).matrix();
      const SparseMatrix& b = m(k).matrix();
      const SparseMatrix bd = b.adjoint();
      SparseMatrix x = SparseMatrix(a * bd) + SparseMatrix(bd * a);
      if (j == k) x -= id;
      SparseMatrix y = SparseMatrix(a * b) + SparseMatrix(b * a);
      worst = std::max({worst, core::max_abs(x), core::max_abs(y)});
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Conserved classifier

struct CandidateRecord {
  std::string name;
  bool hermitian = false;
  double comm_h = 0.0;      // ||[C^2, H]||
  double comm_jumps = 0.0;  // max_j ||[C^2, L_j]||
  bool passed = false;
};

struct Classifier {
  int L = 0;
  LinearOperator C;
  LinearOperator C2;
  std::string chosen;
  std::vector<CandidateRecord> records;
};

inline constexpr double kSymmetryTolerance = 1e-10;

/// Candidates, in order: the printed form -1/2 + sum_k f_k^dag f_{L+1-k}; its
/// Hermitian completion n_0 - 1/2 + sum_k (f_k^dag f_{L+1-k} + h.c.); the
/// antisymmetric-mode number N_- = sum_k a_{k,-}^dag a_{k,-}. Sums run over
/// k = 1..l with l = (L-1)/2.
inline std::vector<std::pair<std::string, LinearOperator>> classifier_candidates(int L) {
  require(L >= 3 && L % 2 == 1, "classifier: L must be odd and >= 3");
  const int l = (L - 1) / 2;
  const auto f = jw_modes(L);
  const Index dim = qsteady::dimension_of(L);
  const SparseMatrix id = LinearOperator::identity(dim).matrix();
  SparseMatrix printed = cplx(-0.5) * id, herm(dim, dim), nminus(dim, dim);
  for (int k = 1; k <= l; ++k) {
    const SparseMatrix hop = SparseMatrix(f(k).matrix().adjoint()) * f(L + 1 - k).matrix();
    printed += hop;
    herm += hop;
    herm += SparseMatrix(hop.adjoint());
    const SparseMatrix a = (f(k).matrix() - f(L + 1 - k).matrix()) / std::sqrt(2.0);
    nminus += SparseMatrix(SparseMatrix(a.adjoint()) * a);
  }
  const SparseMatrix f0 = f(l + 1).matrix();
  herm += SparseMatrix(SparseMatrix(f0.adjoint()) * f0);
  herm -= cplx(0.5) * id;
  return {{"printed", LinearOperator::detect(printed)},
          {"hermitian_completion", LinearOperator::detect(herm)},
          {"antisymmetric_mode_number", LinearOperator::detect(nminus)}};
}

inline CandidateRecord check_candidate(const std::string& name, const LinearOperator& c, const LinearOperator& h,
                                       const std::vector<core::Jump>& jumps) {
  CandidateRecord r;
  r.name = name;
  r.hermitian = c.hermitian();
  const LinearOperator c2 = c * c;
  r.comm_h = core::commutator_norm(c2, h);
  for (const auto& j : jumps) r.comm_jumps = std::max(r.comm_jumps, core::commutator_norm(c2, j.op));
  r.passed = r.hermitian && r.comm_h <= kSymmetryTolerance && r.comm_jumps <= kSymmetryTolerance;
  return r;
}

/// Symmetric reference chain used for validation: distinct palindromic NN
/// couplings, no NNN, center pump and loss.
inline chain::ChainSpec validation_chain(int L) {
  chain::ChainSpec s = chain::ChainSpec::uniform(L, 0.0, 0.0);
  for (int i = 1; i < L; ++i) s.J[std::size_t(i - 1)] = 1.0 + 0.37 * std::min(i, L - i);
  return s;
}

/// First candidate whose square commutes with H and every jump; throws with
/// the full record if none does.
inline Classifier build_C(int L, const LinearOperator& h, const std::vector<core::Jump>& jumps) {
  Classifier out;
  out.L = L;
  for (auto& [name, c] : classifier_candidates(L)) {
    out.records.push_back(check_candidate(name, c, h, jumps));
    if (out.records.back().passed && out.chosen.empty()) {
      out.chosen = name;
      out.C = c;
      out.C2 = c * c;
    }
  }
  if (out.chosen.empty()) {
    std::string msg = "build_C: no candidate is conserved:";
    for (const auto& r : out.records)
      msg += " " + r.name + " (hermitian " + std::to_string(r.hermitian) + ", [C2,H] " + std::to_string(r.comm_h) +
             ", [C2,L] " + std::to_string(r.comm_jumps) + ")";
    throw ValidationError(msg);
  }
  return out;
}

inline Classifier build_C(int L) {
  return build_C(L, chain::xx_hamiltonian(validation_chain(L)), chain::center_pump_loss(L, 1.0, 1.0));
}

// ---------------------------------------------------------------------------
// Sectors

struct SectorProjectors {
  int L = 0;
  std::vector<CMatrix> P;  // P[eta], eta = 0..l
  double completeness_defect = 0.0;
};

/// Spectral projectors of C^2 onto eigenvalues (eta + 1/2)^2.
inline SectorProjectors sector_projectors(const Classifier& c) {
  const int l = (c.L - 1) / 2;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(c.C2.dense());
  require(es.info() == Eigen::Success, "sector_projectors: eigensolver failed");
  SectorProjectors out;
  out.L = c.L;
  const Index dim = c.C2.dim();
  out.P.assign(std::size_t(l + 1), CMatrix::Zero(dim, dim));
  for (Index i = 0; i < dim; ++i) {
    const double lam = es.eigenvalues()(i);
    const double eta = std::sqrt(std::max(lam, 0.0)) - 0.5;
    const long e = std::lround(eta);
    if (e < 0 || e > l || std::abs(eta - double(e)) > 1e-6)
      throw NumericalError("sector_projectors: C^2 eigenvalue " + std::to_string(lam) + " is not of the form (eta+1/2)^2");
    const auto v = es.eigenvectors().col(i);
    out.P[std::size_t(e)] += v * v.adjoint();
  }
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (const auto& p : out.P) sum += p;
  out.completeness_defect = (sum - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
  return out;
}

inline SectorProjectors sector_projectors(int L) { return sector_projectors(build_C(L)); }

struct SectorDecomposition {
  std::vector<double> weights;  // eta = 0..l
  double residual = 0.0;
};

inline SectorDecomposition sector_weights(const SectorProjectors& sp, const core::StateVector& psi) {
  SectorDecomposition d;
  double total = 0.0;
  for (const auto& p : sp.P) {
    d.weights.push_back(std::max(0.0, psi.amplitudes().dot(p * psi.amplitudes()).real()));
    total += d.weights.back();
  }
  d.residual = 1.0 - total;
  return d;
}

inline SectorDecomposition sector_weights(const SectorProjectors& sp, const core::DensityOperator& rho) {
  SectorDecomposition d;
  double total = 0.0;
  for (const auto& p : sp.P) {
    d.weights.push_back(std::max(0.0, (p * rho.matrix()).trace().real()));
    total += d.weights.back();
  }
  d.residual = rho.matrix().trace().real() - total;
  return d;
}

}  // namespace qsteady::symmetry
