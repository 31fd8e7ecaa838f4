#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qsteady/core/evolution.hpp"

using namespace qsteady;
using namespace qsteady::core;

namespace {

LinearOperator dense_op(const oracle::Mat& m) { return LinearOperator::from_dense(m); }

LindbladModel symmetric_pump_loss(double gamma) {
  // gamma/2 (sx rho sx + sy rho sy - 2 rho)
  return LindbladModel{Hamiltonian(LinearOperator::zero(2)),
                       {{single(Axis::X, 1, 1), gamma / 2}, {single(Axis::Y, 1, 1), gamma / 2}}};
}

}  // namespace

TEST(EvolveState, ZeroHamiltonianIsIdentity) {
  std::mt19937_64 rng(1);
  const StateVector psi(3, oracle::random_state(8, rng));
  const auto out = evolve_state(Hamiltonian(LinearOperator::zero(8)), psi, TimeGrid{0.0, 0.01, 100, 10});
  ASSERT_EQ(out.states.size(), 11u);
  for (const auto& s : out.states) EXPECT_LT((s.amplitudes() - psi.amplitudes()).norm(), 1e-15);
}

TEST(EvolveState, RabiPiPulse) {
  const double omega = kTwoPi;
  const Hamiltonian h((omega / 2) * single(Axis::X, 1, 1));
  const auto out = evolve_state(h, StateVector::ground(1), TimeGrid{0.0, 1e-3, 500, 50});
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    const double pe = std::norm(out.states[k][1]);
    EXPECT_NEAR(pe, std::pow(std::sin(omega * out.times[k] / 2), 2), 1e-10);
  }
  EXPECT_NEAR(std::norm(out.states.back()[1]), 1.0, 1e-10);
}

TEST(EvolveState, TwoSiteSwapAtQuarterPeriod) {
  const double J = kTwoPi * 11.0;
  const Hamiltonian h(dense_op(oracle::xx_chain(2, {J})));
  const double t_swap = kPi / (2 * J);
  const long n = 1000;
  const auto out = evolve_state(h, StateVector::excited(2, {1}), TimeGrid{0.0, t_swap / n, n, n});
  EXPECT_NEAR(std::norm(out.states.back()[int(site_mask(2, 2))]), 1.0, 1e-12);
}

TEST(EvolveState, MatchesMatrixExponentialOracle) {
  std::mt19937_64 rng(11);
  const oracle::Mat h = oracle::random_hermitian(8, rng, 5.0);
  const oracle::Vec psi = oracle::random_state(8, rng);
  const auto out = evolve_state(Hamiltonian(dense_op(h)), StateVector(3, psi), TimeGrid{0.0, 5e-4, 1600, 1600});
  EXPECT_LT((out.states.back().amplitudes() - oracle::propagate(h, 0.8, psi)).norm(), 1e-9);
}

TEST(EvolveState, NormCorrectionBelowThresholdAtPaperScales) {
  // Two-site J/2pi = 11 MHz and the single-qubit noise amplitude sqrt(gamma/dt) at 7.5 ns.
  const auto two = evolve_state(Hamiltonian(dense_op(oracle::xx_chain(2, {kTwoPi * 11}))), StateVector::excited(2, {1}),
                                TimeGrid{0.0, 1e-3, 2000, 100});
  EXPECT_LE(two.max_norm_correction, 1e-8);
  const double amp = std::sqrt(1.0 / 0.0075);
  const auto one = evolve_state(Hamiltonian(amp * single(Axis::X, 1, 1)), StateVector::excited(1, {1}),
                                TimeGrid{0.0, 1e-3, 2000, 100});
  EXPECT_LE(one.max_norm_correction, 1e-8);
}

TEST(EvolveState, UnstableStepIsReported) {
  const Hamiltonian h(1000.0 * single(Axis::X, 1, 1));
  EXPECT_THROW(evolve_state(h, StateVector::ground(1), TimeGrid{0.0, 0.01, 10, 1}), NumericalError);
}

TEST(EvolveState, FourthOrderConvergence) {
  const double omega = kTwoPi;
  const Hamiltonian h((omega / 2) * single(Axis::X, 1, 1));
  auto error = [&](long n) {
    const auto out = evolve_state(h, StateVector::ground(1), TimeGrid{0.0, 1.3 / n, n, n});
    const double pe = std::norm(out.states.back()[1]);
    return std::abs(pe - std::pow(std::sin(omega * 1.3 / 2), 2));
  };
  const double coarse = error(40), fine = error(80);
  EXPECT_GE(coarse / fine, 8.0) << coarse << " vs " << fine;
}

TEST(TimeGridValidation, RejectsBadGrids) {
  EXPECT_THROW((TimeGrid{0.0, 0.0, 10, 1}).validate(), InvalidArgument);
  EXPECT_THROW((TimeGrid{0.0, 0.1, 0, 1}).validate(), InvalidArgument);
  EXPECT_THROW((TimeGrid{0.0, 0.1, 10, 3}).validate(), InvalidArgument);
  EXPECT_EQ((TimeGrid{0.0, 0.1, 10, 5}).sample_count(), 3);
}

TEST(EvolveDensity, SigmaZDecaysAtTwiceGamma) {
  const double gamma = 1.0;
  const auto model = symmetric_pump_loss(gamma);
  const auto z = single(Axis::Z, 1, 1);
  const auto out = evolve_density(model, DensityOperator::pure(StateVector::excited(1, {1})), TimeGrid{0.0, 1e-3, 1000, 100});
  for (std::size_t k = 0; k < out.times.size(); ++k)
    EXPECT_NEAR(expectation(z, out.states[k]), std::exp(-2 * gamma * out.times[k]), 1e-10);
  EXPECT_NEAR(expectation(z, out.states.back()), 0.1353352832366127, 1e-10);
}

TEST(EvolveDensity, MaximallyMixedIsFixed) {
  const auto out = evolve_density(symmetric_pump_loss(1.0), DensityOperator::maximally_mixed(1), TimeGrid{0.0, 1e-2, 100, 10});
  for (const auto& s : out.states) EXPECT_LT((s.matrix() - CMatrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EvolveDensity, ConvergesToZeroPolarizationBy2p5us) {
  const auto z = single(Axis::Z, 1, 1);
  for (const auto& psi : {StateVector::ground(1), StateVector::excited(1, {1})}) {
    const auto out = evolve_density(symmetric_pump_loss(1.0), DensityOperator::pure(psi), TimeGrid{0.0, 2.5e-3, 1000, 1000});
    EXPECT_LT(std::abs(expectation(z, out.states.back())), 0.01);
  }
}

TEST(EvolveDensity, MatchesDenseRhsOracleAndStaysPhysical) {
  std::mt19937_64 rng(5);
  const oracle::Mat h = oracle::random_hermitian(4, rng);
  const oracle::Mat l1 = oracle::random_matrix(4, rng), l2 = oracle::random_matrix(4, rng);
  const LindbladModel model{Hamiltonian(dense_op(h)), {{dense_op(l1), 0.3}, {dense_op(l2), 0.2}}};
  const oracle::Mat rho0 = oracle::random_density(4, rng);
  const auto out = evolve_density(model, DensityOperator(2, rho0), TimeGrid{0.0, 1e-3, 500, 50});
  // Reference: fine RK4 on the dense definition.
  oracle::Mat rho = rho0;
  const double dt = 1e-3;
  for (int n = 0; n < 500; ++n) {
    auto f = [&](const oracle::Mat& r) { return oracle::lindblad_rhs(h, {{l1, 0.3}, {l2, 0.2}}, r); };
    const oracle::Mat k1 = f(rho), k2 = f(rho + dt / 2 * k1), k3 = f(rho + dt / 2 * k2), k4 = f(rho + dt * k3);
    rho += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  EXPECT_LT((out.states.back().matrix() - rho).cwiseAbs().maxCoeff(), 1e-12);
  for (const auto& s : out.states) {
    EXPECT_NEAR(s.matrix().trace().real(), 1.0, 1e-9);
    EXPECT_GE(s.min_eigenvalue(), -1e-8);
  }
}

TEST(EvolveDensity, OversizedStepIsReported) {
  const LindbladModel model{Hamiltonian(LinearOperator::zero(2)), {{single(Axis::Minus, 1, 1), 10.0}}};
  EXPECT_THROW(evolve_density(model, DensityOperator::pure(StateVector::excited(1, {1})), TimeGrid{0.0, 0.5, 4, 1}),
               NumericalError);
}

TEST(LindbladModelValidation, RejectsNegativeRatesAndMismatch) {
  LindbladModel bad{Hamiltonian(LinearOperator::zero(2)), {{single(Axis::Minus, 1, 1), -1.0}}};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  LindbladModel mismatch{Hamiltonian(LinearOperator::zero(2)), {{single(Axis::Minus, 1, 2), 1.0}}};
  EXPECT_THROW(mismatch.validate(), InvalidArgument);
}
