#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qsteady/core/types.hpp"

namespace qsteady::core {

/// Largest absolute entry of A - A^dagger.
inline double hermiticity_defect(const SparseMatrix& a) {
  SparseMatrix adj = a.adjoint();
  SparseMatrix diff = a - adj;
  double worst = 0.0;
  for (Index k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

inline double max_abs(const SparseMatrix& a) {
  double worst = 0.0;
  for (Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

/// Sparse complex operator on a qubit register, tagged Hermitian or not.
///
/// The Hermitian tag is never trusted: constructing with `hermitian = true`
/// checks max|A - A^dagger| <= kHermitianTolerance.
class LinearOperator {
 public:
  static constexpr double kHermitianTolerance = 1e-12;

  LinearOperator() = default;

  LinearOperator(SparseMatrix m, bool hermitian) : m_(std::move(m)), hermitian_(hermitian) {
    require(m_.rows() == m_.cols(), "operator must be square");
    m_.makeCompressed();
    if (hermitian_ && hermiticity_defect(m_) > kHermitianTolerance)
      throw InvalidArgument("operator tagged Hermitian but max|A - A^dagger| exceeds 1e-12");
  }

  /// Tags the operator Hermitian iff it is, within kHermitianTolerance.
  static LinearOperator detect(SparseMatrix m) {
    m.makeCompressed();
    const bool h = m.rows() == m.cols() && hermiticity_defect(m) <= kHermitianTolerance;
    return LinearOperator(std::move(m), h);
  }

  static LinearOperator zero(Index dim) { return LinearOperator(SparseMatrix(dim, dim), true); }

  static LinearOperator identity(Index dim) {
    SparseMatrix m(dim, dim);
    m.setIdentity();
    return LinearOperator(std::move(m), true);
  }

  static LinearOperator from_dense(const CMatrix& dense, double drop = 0.0) {
    return detect(dense.sparseView(1.0, drop));
  }

  const SparseMatrix& matrix() const { return m_; }
  bool hermitian() const { return hermitian_; }
  Index dim() const { return m_.rows(); }
  CMatrix dense() const { return CMatrix(m_); }

  CVector apply(const CVector& x) const {
    require(x.size() == dim(), "dimension mismatch in operator application");
    return m_ * x;
  }

  LinearOperator adjoint() const { return LinearOperator(SparseMatrix(m_.adjoint()), hermitian_); }

  friend LinearOperator operator+(const LinearOperator& a, const LinearOperator& b) {
    require(a.dim() == b.dim(), "dimension mismatch in operator sum");
    return detect(a.m_ + b.m_);
  }
  friend LinearOperator operator-(const LinearOperator& a, const LinearOperator& b) {
    require(a.dim() == b.dim(), "dimension mismatch in operator difference");
    return detect(a.m_ - b.m_);
  }
  friend LinearOperator operator*(const LinearOperator& a, const LinearOperator& b) {
    require(a.dim() == b.dim(), "dimension mismatch in operator product");
    return detect(SparseMatrix(a.m_ * b.m_));
  }
  friend LinearOperator operator*(cplx s, const LinearOperator& a) { return detect(SparseMatrix(s * a.m_)); }
  friend LinearOperator operator*(double s, const LinearOperator& a) {
    return LinearOperator(SparseMatrix(cplx(s) * a.m_), a.hermitian_);
  }

 private:
  SparseMatrix m_;
  bool hermitian_ = false;
};

/// max|[A, B]| entrywise.
inline double commutator_norm(const LinearOperator& a, const LinearOperator& b) {
  SparseMatrix c = SparseMatrix(a.matrix() * b.matrix()) - SparseMatrix(b.matrix() * a.matrix());
  return max_abs(c);
}

enum class Axis { X, Y, Z, Plus, Minus, N };

inline Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  if (s == "z") return Axis::Z;
  if (s == "+" || s == "plus") return Axis::Plus;
  if (s == "-" || s == "minus") return Axis::Minus;
  if (s == "n") return Axis::N;
  throw InvalidArgument("unknown axis '" + s + "'");
}

struct PauliFactor {
  int site;
  Axis axis;
};

namespace detail {

// Single-qubit action on basis bit (0 = |g>, 1 = |e>): output bit and amplitude.
// Amplitude 0 means the basis state is annihilated.
struct BitAction {
  int out;
  cplx amp;
};

inline BitAction act(Axis axis, int bit) {
  switch (axis) {
    case Axis::X: return {1 - bit, 1.0};
    case Axis::Y: return bit == 0 ? BitAction{1, -kI} : BitAction{0, kI};
    case Axis::Z: return {bit, bit == 1 ? 1.0 : -1.0};
    case Axis::Plus: return bit == 0 ? BitAction{1, 1.0} : BitAction{0, 0.0};
    case Axis::Minus: return bit == 1 ? BitAction{0, 1.0} : BitAction{1, 0.0};
    case Axis::N: return {bit, bit == 1 ? 1.0 : 0.0};
  }
  return {bit, 0.0};
}

}  // namespace detail

/// Tensor product of single-qubit operators at the listed sites, identity
/// elsewhere. Conventions: sigma^z = |e><e| - |g><g|, sigma^+ = |e><g|,
/// sigma^y = -i sigma^+ + i sigma^-, n = |e><e|.
inline LinearOperator pauli_string(const std::vector<PauliFactor>& factors, int qubits) {
  const Index dim = dimension_of(qubits);
  std::set<int> seen;
  for (const auto& f : factors) {
    require(f.site >= 1 && f.site <= qubits, "site " + std::to_string(f.site) + " out of range");
    require(seen.insert(f.site).second, "duplicate site " + std::to_string(f.site));
  }
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(static_cast<std::size_t>(dim));
  for (Index col = 0; col < dim; ++col) {
    std::uint64_t row = static_cast<std::uint64_t>(col);
    cplx amp = 1.0;
    for (const auto& f : factors) {
      const std::uint64_t mask = site_mask(qubits, f.site);
      const int bit = (row & mask) ? 1 : 0;
      const auto a = detail::act(f.axis, bit);
      amp *= a.amp;
      if (amp == cplx(0.0)) break;
      row = a.out ? (row | mask) : (row & ~mask);
    }
    if (amp != cplx(0.0)) trips.emplace_back(static_cast<Index>(row), col, amp);
  }
  SparseMatrix m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  return LinearOperator::detect(std::move(m));
}

inline LinearOperator single(Axis axis, int site, int qubits) { return pauli_string({{site, axis}}, qubits); }

/// Sum of the given operators with real coefficients.
inline LinearOperator linear_combination(const std::vector<std::pair<double, LinearOperator>>& terms, Index dim) {
  SparseMatrix acc(dim, dim);
  for (const auto& [c, op] : terms) {
    require(op.dim() == dim, "dimension mismatch in linear combination");
    acc += cplx(c) * op.matrix();
  }
  return LinearOperator::detect(std::move(acc));
}

/// Total excitation number sum_j n_j (diagonal).
inline LinearOperator excitation_number(int qubits) {
  const Index dim = dimension_of(qubits);
  SparseMatrix m(dim, dim);
  std::vector<Eigen::Triplet<cplx>> trips;
  for (Index b = 0; b < dim; ++b) {
    const int pop = __builtin_popcountll(static_cast<unsigned long long>(b));
    if (pop) trips.emplace_back(b, b, double(pop));
  }
  m.setFromTriplets(trips.begin(), trips.end());
  return LinearOperator(std::move(m), true);
}

/// Permutation operator mapping site j to site L + 1 - j.
inline LinearOperator reflection(int qubits) {
  const Index dim = dimension_of(qubits);
  std::vector<Eigen::Triplet<cplx>> trips;
  for (Index b = 0; b < dim; ++b) {
    std::uint64_t r = 0;
    for (int j = 1; j <= qubits; ++j)
      if (static_cast<std::uint64_t>(b) & site_mask(qubits, j)) r |= site_mask(qubits, qubits + 1 - j);
    trips.emplace_back(static_cast<Index>(r), b, 1.0);
  }
  SparseMatrix m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  return LinearOperator(std::move(m), true);
}

}  // namespace qsteady::core
