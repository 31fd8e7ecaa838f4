#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qsteady/chain/spec.hpp"
#include "qsteady/core/evolution.hpp"
#include "qsteady/symmetry/sectors.hpp"
#include "qsteady/symmetry/states.hpp"

using namespace qsteady;
using namespace qsteady::symmetry;

namespace {

chain::ChainSpec paper_like(int L) {
  chain::ChainSpec s = chain::ChainSpec::uniform(L, kTwoPi * 11.0, 0.0);
  return s;
}

int excitations(const StateVector& psi) {
  const double n = core::expectation(core::excitation_number(psi.qubits()), psi);
  return int(std::lround(n));
}

}  // namespace

TEST(JordanWigner, FirstModeHasNoString) {
  const auto m = jw_modes(3);
  EXPECT_LT((m(1).dense() - oracle::embed(3, {{1, oracle::sm()}})).cwiseAbs().maxCoeff(), 1e-15);
  const oracle::Mat want3 = oracle::embed(3, {{1, -oracle::sz()}, {2, -oracle::sz()}, {3, oracle::sm()}});
  EXPECT_LT((m(3).dense() - want3).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(JordanWigner, CanonicalAnticommutation) {
  for (int L : {1, 3, 4}) EXPECT_LE(car_defect(jw_modes(L)), 1e-12) << L;
  const auto m = jw_modes(3);
  EXPECT_LE(core::max_abs(SparseMatrix(SparseMatrix(m(1).matrix() * m(2).matrix()) + SparseMatrix(m(2).matrix() * m(1).matrix()))), 1e-12);
}

TEST(JordanWigner, NumberOperatorsAreSiteOccupations) {
  const auto m = jw_modes(5);
  for (int k = 1; k <= 5; ++k) {
    const SparseMatrix nk = SparseMatrix(m(k).matrix().adjoint()) * m(k).matrix();
    EXPECT_LE(core::max_abs(SparseMatrix(nk - core::single(Axis::N, k, 5).matrix())), 1e-12);
  }
}

TEST(Classifier, HermitianCompletionIsChosen) {
  for (int L : {3, 5}) {
    const auto c = build_C(L);
    ASSERT_EQ(c.records.size(), 3u);
    EXPECT_EQ(c.records[0].name, "printed");
    EXPECT_FALSE(c.records[0].hermitian);
    EXPECT_FALSE(c.records[0].passed);
    EXPECT_EQ(c.chosen, "hermitian_completion");
    EXPECT_TRUE(c.C.hermitian());
    EXPECT_LE(c.records[1].comm_h, 1e-10);
    EXPECT_LE(c.records[1].comm_jumps, 1e-10);
    // C itself commutes with H; the jumps only conserve C^2.
    EXPECT_LE(core::commutator_norm(c.C, chain::xx_hamiltonian(validation_chain(L))), 1e-10);
    EXPECT_GT(core::commutator_norm(c.C, chain::center_pump_loss(L, 1, 1)[0].op), 0.1);
  }
}

TEST(Classifier, PaperScaleChainAndRetainedCenterNnn) {
  for (int L : {3, 5}) {
    const auto h = chain::xx_hamiltonian(paper_like(L));
    EXPECT_NO_THROW(build_C(L, h, chain::center_pump_loss(L, 1.0, 1.0)));
  }
  // L = 9 with only the (4,6) NNN kept
  chain::ChainSpec s = paper_like(9);
  s.J2[3] = kTwoPi;
  const auto c = build_C(9, chain::xx_hamiltonian(s), chain::center_pump_loss(9, 1.0, 1.0));
  EXPECT_LE(c.records[1].comm_h, 1e-10 * kTwoPi * 11.0);
}

TEST(Classifier, SpectrumOfSquareIsHalfIntegerSquares) {
  const auto c = build_C(5);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(c.C2.dense(), Eigen::EigenvaluesOnly);
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()(i);
    EXPECT_TRUE(std::abs(v - 0.25) < 1e-10 || std::abs(v - 2.25) < 1e-10 || std::abs(v - 6.25) < 1e-10) << v;
  }
}

TEST(Classifier, BrokenReflectionIsDetected) {
  for (int L : {3, 5}) {
    chain::ChainSpec s = validation_chain(L);
    s.J[0] *= 1.05;
    const auto cands = classifier_candidates(L);
    const auto r = check_candidate(cands[1].first, cands[1].second, chain::xx_hamiltonian(s), chain::center_pump_loss(L, 1, 1));
    EXPECT_GT(r.comm_h, 1e-6);
    EXPECT_THROW(build_C(L, chain::xx_hamiltonian(s), chain::center_pump_loss(L, 1, 1)), ValidationError);
  }
  // uniform NNN on every pair breaks it too
  const auto h = chain::xx_hamiltonian(chain::ChainSpec::uniform(5, 1.0, 0.1));
  EXPECT_THROW(build_C(5, h, chain::center_pump_loss(5, 1, 1)), ValidationError);
}

TEST(Sectors, ProjectorsAreCompleteAndOrthogonal) {
  const auto sp = sector_projectors(5);
  ASSERT_EQ(sp.P.size(), 3u);
  EXPECT_LE(sp.completeness_defect, 1e-10);
  double rank = 0.0;
  for (std::size_t a = 0; a < sp.P.size(); ++a) {
    rank += sp.P[a].trace().real();
    for (std::size_t b = 0; b < sp.P.size(); ++b) {
      const CMatrix want = a == b ? sp.P[a] : CMatrix::Zero(32, 32);
      EXPECT_LE((sp.P[a] * sp.P[b] - want).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
  EXPECT_NEAR(rank, 32.0, 1e-9);
}

TEST(Sectors, PhiEtaStatesLieInTheirSectors) {
  const auto sp = sector_projectors(5);
  for (int eta = 0; eta <= 2; ++eta) {
    const auto psi = phi_eta_state(5, eta);
    EXPECT_LE((sp.P[std::size_t(eta)] * psi.amplitudes() - psi.amplitudes()).norm(), 1e-10);
    const auto w = sector_weights(sp, psi);
    EXPECT_NEAR(w.weights[std::size_t(eta)], 1.0, 1e-10);
    EXPECT_LE(std::abs(w.residual), 1e-9);
  }
}

TEST(Sectors, BellPairWeightsFollowPhase) {
  for (int L : {3, 5, 7}) {
    const auto sp = sector_projectors(L);
    for (double phi : {0.0, kPi / 4, kPi / 2, 2.0, kPi}) {
      const auto w = sector_weights(sp, bell_chain_state(L, phi));
      EXPECT_NEAR(w.weights[0], std::pow(std::cos(phi / 2), 2), 1e-10);
      EXPECT_NEAR(w.weights[1], std::pow(std::sin(phi / 2), 2), 1e-10);
      for (std::size_t e = 2; e < w.weights.size(); ++e) EXPECT_NEAR(w.weights[e], 0.0, 1e-10);
    }
  }
  const auto w = sector_weights(sector_projectors(5), bell_chain_state(5, kPi / 2));
  EXPECT_NEAR(w.weights[0], 0.5, 1e-10);
  EXPECT_NEAR(w.weights[1], 0.5, 1e-10);
}

TEST(Sectors, WeightsConservedUnderDissipativeEvolution) {
  std::mt19937_64 rng(17);
  for (int L : {3, 5}) {
    const auto sp = sector_projectors(L);
    core::LindbladModel model{core::Hamiltonian(chain::xx_hamiltonian(paper_like(L))), chain::center_pump_loss(L, 1.0, 1.0)};
    const auto rho0 = core::DensityOperator(L, oracle::random_density(1 << L, rng));
    const auto out = core::evolve_density(model, rho0, core::TimeGrid::spanning(2.0, 20, 200));
    const auto w0 = sector_weights(sp, rho0);
    double drift = 0.0;
    for (const auto& r : out.states) {
      const auto w = sector_weights(sp, r);
      for (std::size_t e = 0; e < w.weights.size(); ++e) drift = std::max(drift, std::abs(w.weights[e] - w0.weights[e]));
    }
    EXPECT_LT(drift, 1e-6) << L;
  }
}

TEST(States, PhiEtaExamples) {
  const auto g = phi_eta_state(9, 0);
  EXPECT_EQ(std::abs(g[0]), 1.0);
  const auto p1 = phi_eta_state(9, 1);
  EXPECT_NEAR(p1[Index(site_mask(9, 4))].real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(p1[Index(site_mask(9, 6))].real(), -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(p1.amplitudes().squaredNorm(), 1.0, 1e-15);
  for (int a = 0; a <= 2; ++a) {
    EXPECT_EQ(excitations(phi_eta_state(5, a)), a);
    for (int b = 0; b <= 2; ++b)
      EXPECT_NEAR(std::abs(core::overlap(phi_eta_state(5, a), phi_eta_state(5, b))), a == b ? 1.0 : 0.0, 1e-12);
  }
  EXPECT_THROW(phi_eta_state(5, 3), InvalidArgument);
  EXPECT_THROW(phi_eta_state(4, 0), InvalidArgument);
}

TEST(States, BellChainState) {
  const auto s = bell_chain_state(5, 0.0);
  EXPECT_NEAR(s[Index(site_mask(5, 2))].real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s[Index(site_mask(5, 4))].real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(core::fidelity(bell_chain_state(9, kPi), phi_eta_state(9, 1)), 1.0, 1e-12);
}

TEST(Gates, UnitaryAndDefinitions) {
  for (const auto& g : {Gate::rz(0.7, 1), Gate::x(1), Gate::half_swap(1, 2), Gate::iswap(1, 2)}) {
    const CMatrix u = gate_matrix(g);
    EXPECT_LE((u * u.adjoint() - CMatrix::Identity(u.rows(), u.rows())).cwiseAbs().maxCoeff(), 1e-12);
  }
  std::mt19937_64 rng(3);
  const StateVector psi(3, oracle::random_state(8, rng));
  const auto r = apply_gate(Gate::rz(kTwoPi, 2), psi);
  EXPECT_LE((r.amplitudes() + psi.amplitudes()).norm(), 1e-12);

  const auto eg = StateVector::excited(2, {1});
  const auto sw = apply_gate(Gate::iswap(1, 2), eg);
  EXPECT_LE(std::abs(sw[Index(site_mask(2, 2))] - kI), 1e-15);

  const auto hs = apply_gate(Gate::half_swap(1, 3), apply_gate(Gate::x(1), StateVector::ground(3)));
  const cplx a = hs[Index(site_mask(3, 1))], b = hs[Index(site_mask(3, 3))];
  EXPECT_NEAR(std::abs(a), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(b), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::arg(b / a), kHalfSwapPhase, 1e-15);

  // dense oracle for rz on a middle qubit: exp(-i sz theta / 2)
  const oracle::Mat rz = oracle::embed(3, {{2, (CMatrix(-kI * 0.35 * oracle::sz())).exp()}});
  EXPECT_LE((apply_gate(Gate::rz(0.7, 2), psi).amplitudes() - rz * psi.amplitudes()).norm(), 1e-12);
  EXPECT_THROW(apply_gate(Gate::iswap(2, 2), psi), InvalidArgument);
  EXPECT_THROW(apply_gate(Gate::x(4), psi), InvalidArgument);
}

TEST(Gates, BellPrepCircuit) {
  for (double phi : {0.0, kPi / 2, kPi}) {
    const auto out = bell_prep_circuit(9, phi);
    EXPECT_GE(core::fidelity(out, bell_chain_state(9, phi)), 0.999);
    EXPECT_EQ(excitations(out), 1);
  }
  EXPECT_LE(std::abs(core::overlap(bell_prep_circuit(5, 0.0), bell_prep_circuit(5, kPi))), 1e-12);
}

TEST(Predictions, SteadyValues) {
  EXPECT_DOUBLE_EQ(predicted_steady_value(9, 0), 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(predicted_steady_value(9, 1), 0.0);
  EXPECT_DOUBLE_EQ(predicted_steady_value(5, 1), -0.2);
  EXPECT_THROW(predicted_steady_value(5, 2), Unsupported);
  EXPECT_NEAR(predicted_phase_curve(5, 0.0), 0.2, 1e-15);
  EXPECT_NEAR(predicted_phase_curve(5, kPi / 2), 0.0, 1e-15);
  EXPECT_NEAR(predicted_phase_curve(5, kPi), -0.2, 1e-15);
  for (double phi = 0.0; phi <= kPi; phi += kPi / 8) EXPECT_NEAR(predicted_phase_curve(5, phi), std::cos(phi) / 5.0, 1e-15);
}
