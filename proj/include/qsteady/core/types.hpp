#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qsteady {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
struct InvalidArgument : Error {
  using Error::Error;
};

/// An integrator or decomposition left its numerical safety envelope.
struct NumericalError : Error {
  using Error::Error;
};

/// A scenario or configuration failed validation.
struct ValidationError : Error {
  using Error::Error;
};

/// Filesystem failures and refusals to overwrite.
struct IoError : Error {
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

/// Hilbert-space dimension of an L-qubit register.
inline Index dimension_of(int qubits) {
  require(qubits >= 1 && qubits <= 20, "qubit count out of range: " + std::to_string(qubits));
  return Index{1} << qubits;
}

/// Bit mask of qubit `site` (1-based) in a basis index. Qubit 1 is the most
/// significant bit: basis index b has qubit j excited iff bit (L - j) is set.
inline std::uint64_t site_mask(int qubits, int site) {
  return std::uint64_t{1} << (qubits - site);
}

}  // namespace qsteady
