#pragma once
// Test-only reference constructions. Nothing here calls into the code paths it
// is used to check: operators are built by explicit dense Kronecker products
// in the textbook 2x2 convention, dynamics by closed forms or brute force.

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Basis {|g>, |e>} = {index 0, index 1}.
inline Mat sx() { Mat m(2, 2); m << 0, 1, 1, 0; return m; }
inline Mat sy() { Mat m(2, 2); m << 0, cplx(0, 1), cplx(0, -1), 0; return m; }  // <g|sy|e> = i
inline Mat sz() { Mat m(2, 2); m << -1, 0, 0, 1; return m; }
inline Mat sp() { Mat m(2, 2); m << 0, 0, 1, 0; return m; }  // |e><g|
inline Mat sm() { Mat m(2, 2); m << 0, 1, 0, 0; return m; }  // |g><e|
inline Mat id2() { return Mat::Identity(2, 2); }

/// Qubit 1 is the leftmost Kronecker factor (most significant bit).
inline Mat embed(int L, const std::map<int, Mat>& ops) {
  Mat m = Mat::Identity(1, 1);
  for (int j = 1; j <= L; ++j) {
    auto it = ops.find(j);
    const Mat f = it == ops.end() ? id2() : it->second;
    Mat next(m.rows() * 2, m.cols() * 2);
    for (int a = 0; a < m.rows(); ++a)
      for (int b = 0; b < m.cols(); ++b) next.block(2 * a, 2 * b, 2, 2) = m(a, b) * f;
    m = next;
  }
  return m;
}

/// Dense XX chain with optional NNN, sum J (s+ s- + s- s+).
inline Mat xx_chain(int L, const std::vector<double>& J, const std::vector<double>& J2 = {}) {
  const int d = 1 << L;
  Mat h = Mat::Zero(d, d);
  for (int i = 1; i < L; ++i) h += J[i - 1] * (embed(L, {{i, sp()}, {i + 1, sm()}}) + embed(L, {{i, sm()}, {i + 1, sp()}}));
  for (int i = 1; i + 2 <= L && !J2.empty(); ++i)
    h += J2[i - 1] * (embed(L, {{i, sp()}, {i + 2, sm()}}) + embed(L, {{i, sm()}, {i + 2, sp()}}));
  return h;
}

/// Dense Lindblad right-hand side, straight from the definition.
inline Mat lindblad_rhs(const Mat& h, const std::vector<std::pair<Mat, double>>& jumps, const Mat& rho) {
  const cplx i(0, 1);
  Mat out = -i * (h * rho - rho * h);
  for (const auto& [l, r] : jumps) {
    const Mat ld = l.adjoint();
    out += r * (l * rho * ld - 0.5 * (ld * l * rho + rho * ld * l));
  }
  return out;
}

inline Mat random_hermitian(int d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat a(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) a(r, c) = cplx(n(rng), n(rng));
  return 0.5 * (a + a.adjoint());
}

inline Mat random_matrix(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat a(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) a(r, c) = cplx(n(rng), n(rng));
  return a;
}

inline Mat random_density(int d, std::mt19937_64& rng) {
  Mat a = random_matrix(d, rng);
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

inline Vec random_state(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(d);
  for (int k = 0; k < d; ++k) v(k) = cplx(n(rng), n(rng));
  return v / v.norm();
}

/// exp(-i H t) psi by dense matrix exponential.
inline Vec propagate(const Mat& h, double t, const Vec& psi) {
  Mat u = (cplx(0, -t) * h).exp();
  return u * psi;
}

}  // namespace oracle
