#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qsteady/core/operators.hpp"

namespace qsteady::core {

/// Normalized pure state of an L-qubit register.
class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-9;

  StateVector(int qubits, CVector amplitudes) : qubits_(qubits), amps_(std::move(amplitudes)) {
    require(amps_.size() == dimension_of(qubits_), "amplitude count must equal 2^L");
    if (std::abs(amps_.norm() - 1.0) > kNormTolerance)
      throw InvalidArgument("state vector is not normalized (|norm - 1| > 1e-9)");
  }

  /// Scales `amplitudes` to unit norm first.
  static StateVector normalized(int qubits, CVector amplitudes) {
    const double n = amplitudes.norm();
    require(n > 0.0, "cannot normalize the zero vector");
    amplitudes /= n;
    return StateVector(qubits, std::move(amplitudes));
  }

  static StateVector basis(int qubits, std::uint64_t index) {
    CVector v = CVector::Zero(dimension_of(qubits));
    require(static_cast<Index>(index) < v.size(), "basis index out of range");
    v(static_cast<Index>(index)) = 1.0;
    return StateVector(qubits, std::move(v));
  }

  /// Product state with the listed sites in |e> and all others in |g>.
  static StateVector excited(int qubits, const std::vector<int>& sites) {
    std::uint64_t b = 0;
    for (int s : sites) {
      require(s >= 1 && s <= qubits, "site out of range");
      b |= site_mask(qubits, s);
    }
    return basis(qubits, b);
  }

  static StateVector ground(int qubits) { return basis(qubits, 0); }

  int qubits() const { return qubits_; }
  Index dim() const { return amps_.size(); }
  const CVector& amplitudes() const { return amps_; }
  cplx operator[](Index i) const { return amps_(i); }

 private:
  int qubits_;
  CVector amps_;
};

inline cplx overlap(const StateVector& a, const StateVector& b) { return a.amplitudes().dot(b.amplitudes()); }

inline double fidelity(const StateVector& a, const StateVector& b) { return std::norm(overlap(a, b)); }

/// Hermitian, unit-trace, positive semidefinite operator on L qubits.
class DensityOperator {
 public:
  static constexpr double kHermitianTolerance = 1e-9;
  static constexpr double kTraceTolerance = 1e-9;
  static constexpr double kPositivityTolerance = -1e-8;

  DensityOperator(int qubits, CMatrix matrix) : qubits_(qubits), m_(std::move(matrix)) {
    const Index d = dimension_of(qubits_);
    require(m_.rows() == d && m_.cols() == d, "density matrix must be 2^L x 2^L");
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance)
      throw InvalidArgument("density matrix is not Hermitian within 1e-9");
    if (std::abs(m_.trace() - cplx(1.0)) > kTraceTolerance)
      throw InvalidArgument("density matrix trace differs from 1 by more than 1e-9");
    const double lmin = min_eigenvalue();
    if (lmin < kPositivityTolerance)
      throw NumericalError("density matrix has eigenvalue " + std::to_string(lmin) + " below -1e-8");
  }

  static DensityOperator pure(const StateVector& psi) {
    const CVector& a = psi.amplitudes();
    return DensityOperator(psi.qubits(), a * a.adjoint());
  }

  static DensityOperator maximally_mixed(int qubits) {
    const Index d = dimension_of(qubits);
    return DensityOperator(qubits, CMatrix::Identity(d, d) / double(d));
  }

  int qubits() const { return qubits_; }
  Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  double purity() const { return (m_ * m_).trace().real(); }

 private:
  int qubits_;
  CMatrix m_;
};

namespace detail {
inline double checked_real(cplx v) {
  if (std::abs(v.imag()) > 1e-9) throw NumericalError("expectation value has imaginary residue above 1e-9");
  return v.real();
}
}  // namespace detail

/// <psi|A|psi> for Hermitian A.
inline double expectation(const LinearOperator& op, const StateVector& psi) {
  require(op.hermitian(), "expectation requires a Hermitian operator");
  require(op.dim() == psi.dim(), "dimension mismatch in expectation");
  return detail::checked_real(psi.amplitudes().dot(op.matrix() * psi.amplitudes()));
}

/// Tr(A rho) for Hermitian A.
inline double expectation(const LinearOperator& op, const DensityOperator& rho) {
  require(op.hermitian(), "expectation requires a Hermitian operator");
  require(op.dim() == rho.dim(), "dimension mismatch in expectation");
  const SparseMatrix& a = op.matrix();
  cplx acc = 0.0;
  for (Index r = 0; r < a.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) acc += it.value() * rho.matrix()(it.col(), r);
  return detail::checked_real(acc);
}

/// Unnormalized-vector variant used inside integrators: <x|A|x> / <x|x>.
inline double expectation_raw(const SparseMatrix& a, const CVector& x) {
  const double nn = x.squaredNorm();
  return (x.dot(a * x)).real() / nn;
}

}  // namespace qsteady::core
