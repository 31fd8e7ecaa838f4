#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include "qsteady/core/evolution.hpp"

namespace qsteady::core {

// Vectorization is row-major throughout: vec(X)[i * D + j] = X(i, j), so that
// vec(A X B) = (A kron B^T) vec(X).

inline CVector vectorize(const CMatrix& x) {
  CVector v(x.size());
  const Index d = x.rows();
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) v(i * d + j) = x(i, j);
  return v;
}

inline CMatrix unvectorize(const CVector& v) {
  const Index d = static_cast<Index>(std::llround(std::sqrt(double(v.size()))));
  require(d * d == v.size(), "vector length is not a perfect square");
  CMatrix x(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = v(i * d + j);
  return x;
}

inline constexpr int kMaxLiouvillianQubits = 6;

/// Superoperator M with vec(d rho / dt) = M vec(rho).
inline LinearOperator liouvillian_matrix(const LindbladModel& model) {
  model.validate();
  require(model.hamiltonian.time_independent(), "Liouvillian requires a time-independent Hamiltonian");
  const Index d = model.hamiltonian.dim();
  require(d <= (Index{1} << kMaxLiouvillianQubits), "Liouvillian dimension guard: at most 6 qubits");
  SparseMatrix id(d, d);
  id.setIdentity();
  const SparseMatrix& h = model.hamiltonian.static_part().matrix();
  SparseMatrix ht = h.transpose();
  SparseMatrix m = -kI * SparseMatrix(Eigen::kroneckerProduct(h, id)) + kI * SparseMatrix(Eigen::kroneckerProduct(id, ht));
  for (const auto& j : model.jumps) {
    if (j.rate == 0.0) continue;
    const SparseMatrix& l = j.op.matrix();
    SparseMatrix lconj = l.conjugate();
    SparseMatrix ldl = SparseMatrix(l.adjoint()) * l;
    SparseMatrix ldlt = ldl.transpose();
    m += cplx(j.rate) * SparseMatrix(Eigen::kroneckerProduct(l, lconj));
    m -= cplx(0.5 * j.rate) * SparseMatrix(Eigen::kroneckerProduct(ldl, id));
    m -= cplx(0.5 * j.rate) * SparseMatrix(Eigen::kroneckerProduct(id, ldlt));
  }
  m.prune(cplx(0.0));
  return LinearOperator(std::move(m), false);
}

/// Singular values within this factor of the cutoff make the null-space
/// dimension ambiguous.
inline constexpr double kAmbiguityFactor = 10.0;
inline constexpr double kNullRelativeCutoff = 1e-10;

struct AmbiguousCutoff : NumericalError {
  using NumericalError::NumericalError;
};

struct SteadyStateSpace {
  std::vector<CMatrix> right;      // steady operators B with M vec(B) = 0, orthonormal in HS norm
  std::vector<CMatrix> left;       // conserved operators Q with vec(Q)^+ M = 0
  Eigen::VectorXd singular_values; // descending
  double cutoff = 0.0;
  int dimension() const { return static_cast<int>(right.size()); }
};

/// Null space of a Liouvillian from its singular value decomposition.
inline SteadyStateSpace steady_states(const LinearOperator& liouvillian) {
  const CMatrix m = liouvillian.dense();
  Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SteadyStateSpace out;
  out.singular_values = svd.singularValues();
  const double smax = out.singular_values.size() ? out.singular_values(0) : 0.0;
  out.cutoff = kNullRelativeCutoff * smax;
  for (Index k = 0; k < out.singular_values.size(); ++k) {
    const double s = out.singular_values(k);
    if (s > out.cutoff / kAmbiguityFactor && s < out.cutoff * kAmbiguityFactor)
      throw AmbiguousCutoff("singular value " + std::to_string(s) + " lies within a factor 10 of the null-space cutoff " +
                            std::to_string(out.cutoff));
    if (s < out.cutoff) {
      out.right.push_back(unvectorize(svd.matrixV().col(k)));
      out.left.push_back(unvectorize(svd.matrixU().col(k)));
    }
  }
  if (out.right.empty()) throw NumericalError("Liouvillian has no null space");
  return out;
}

/// Long-time limit of rho0 under the Liouvillian: projection onto the null
/// space along the conserved quantities, R (Q^+ R)^{-1} Q^+ vec(rho0).
inline CMatrix project_to_steady(const SteadyStateSpace& ns, const CMatrix& rho0) {
  const Index k = ns.dimension();
  const Index n = rho0.size();
  CMatrix r(n, k), q(n, k);
  for (Index i = 0; i < k; ++i) {
    r.col(i) = vectorize(ns.right[static_cast<std::size_t>(i)]);
    q.col(i) = vectorize(ns.left[static_cast<std::size_t>(i)]);
  }
  const CMatrix gram = q.adjoint() * r;
  const CVector coeff = gram.fullPivLu().solve(q.adjoint() * vectorize(rho0));
  return unvectorize(r * coeff);
}

}  // namespace qsteady::core
