#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "oracles.hpp"
#include "qsteady/noise/philox.hpp"
#include "qsteady/noise/rabi.hpp"
#include "qsteady/noise/realization.hpp"

using namespace qsteady;
using namespace qsteady::noise;

// Known-answer blocks, frozen from an independent Philox4x64-10 implementation
// (numpy.random.Philox: random_raw after construction yields block(counter + 1)).
TEST(Philox, KnownAnswerVectors) {
  using C = Philox4x64::Counter;
  EXPECT_EQ(Philox4x64::block({1, 0, 0, 0}, {0, 0}),
            (C{0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL}));
  EXPECT_EQ(Philox4x64::block({6, 0, 0, 0}, {0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL}),
            (C{0x35dd9305cefefa78ULL, 0x65c1de6ac953ffabULL, 0x8330dfb71ce43db2ULL, 0x1e27a1cbf7fadb02ULL}));
  EXPECT_EQ(Philox4x64::block({1, 0, 0, 0}, {42, 0x6e6f697365ULL}),
            (C{0x3e385a18a477d3b1ULL, 0xd3668fcc105e08ecULL, 0x3ddf35afa6fc98e9ULL, 0x334cb860cfd17e9cULL}));
}

TEST(Philox, UnitIntervalIsHalfOpen) {
  EXPECT_EQ(to_unit(0), 0.0);
  EXPECT_LT(to_unit(~0ULL), 1.0);
  PhiloxStream a(9, stream::kJumps), b(9, stream::kJumps), c(9, stream::kNoise);
  for (int k = 0; k < 10; ++k) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
  }
}

TEST(SampleNoise, SameSeedSameArray) {
  const auto a = sample_noise(42, 8, {1}, 0.0075), b = sample_noise(42, 8, {1}, 0.0075);
  EXPECT_EQ(a.data(), b.data());
  EXPECT_EQ(a.data().size(), 16u);
  EXPECT_NE(a.data(), sample_noise(43, 8, {1}, 0.0075).data());
}

TEST(SampleNoise, ChannelLayoutFollowsCounterBits) {
  const auto r = sample_noise(42, 3, {2, 5}, 0.0075);
  for (long s = 0; s < 3; ++s) {
    const auto blk = Philox4x64::block({std::uint64_t(s), 0, 0, 0}, {42, stream::kNoise});
    for (int c = 0; c < 4; ++c) EXPECT_EQ(r.eta(s, c), ((blk[0] >> c) & 1) ? 1 : -1);
  }
  EXPECT_EQ(r.pair(1, 1)[0], r.eta(1, 2));
}

TEST(SampleNoise, MomentsWithinBinomialBounds) {
  // 10^6 draws per channel: |mean| <= 3/sqrt(N), |E[a b]| <= 3/sqrt(N).
  const long n = 1000000;
  const auto r = sample_noise(2024, n, {1, 2}, 0.0075);
  double mean[4] = {0, 0, 0, 0}, c01 = 0, c02 = 0, c13 = 0, lag = 0;
  for (long s = 0; s < n; ++s) {
    for (int c = 0; c < 4; ++c) mean[c] += r.eta(s, c);
    c01 += r.eta(s, 0) * r.eta(s, 1);
    c02 += r.eta(s, 0) * r.eta(s, 2);
    c13 += r.eta(s, 1) * r.eta(s, 3);
    if (s) lag += r.eta(s, 0) * r.eta(s - 1, 0);
  }
  const double bound = 3.0 / std::sqrt(double(n));
  for (double m : mean) EXPECT_LE(std::abs(m / n), bound);
  EXPECT_LE(std::abs(c01 / n), bound);
  EXPECT_LE(std::abs(c02 / n), bound);
  EXPECT_LE(std::abs(c13 / n), bound);
  EXPECT_LE(std::abs(lag / (n - 1)), bound);
}

TEST(SampleNoise, RejectsBadArguments) {
  EXPECT_THROW(sample_noise(1, 0, {1}, 0.0075), InvalidArgument);
  EXPECT_THROW(sample_noise(1, 4, {1, 1}, 0.0075), InvalidArgument);
  EXPECT_THROW(NoiseRealization({1, 0}, 1, 0.0075, 0, {1}), InvalidArgument);
}

TEST(NoiseHamiltonian, NormAndRotationAngle) {
  NoiseRealization r({1, -1}, 1, 0.0075, 0, {1});
  const auto h = noise_hamiltonian(r, 0, 1.0, 1, 1);
  ASSERT_TRUE(h.hermitian());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.dense());
  // sqrt(gamma/dt) = sqrt(1/0.0075)
  EXPECT_NEAR(es.eigenvalues().maxCoeff(), 11.547005383792516, 1e-12);
  const CMatrix u = (CMatrix(-kI * 0.0075 * h.dense())).exp();
  Eigen::ComplexEigenSolver<CMatrix> eu(u);
  const double angle = std::abs(std::arg(eu.eigenvalues()(0)));
  EXPECT_NEAR(angle, 0.08660254037844387, 1e-12);
}

TEST(NoiseHamiltonian, MatchesDenseOracleAndVanishesWithGamma) {
  NoiseRealization r({-1, 1, 1, 1}, 2, 0.015, 0, {2});
  const double a = std::sqrt(0.7 / 0.03);
  const oracle::Mat want = oracle::embed(3, {{2, a * (-oracle::sx() + oracle::sy())}});
  EXPECT_LT((noise_hamiltonian(r, 0, 0.7, 2, 3).dense() - want).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_EQ(noise_hamiltonian(r, 1, 0.0, 2, 3).matrix().norm(), 0.0);
  EXPECT_THROW(noise_hamiltonian(r, 2, 1.0, 2, 3), InvalidArgument);
  EXPECT_THROW(noise_hamiltonian(r, 0, 1.0, 1, 3), InvalidArgument);
}

TEST(PulseSchedule, PhasesAndAmplitude) {
  EXPECT_EQ(pulse_phase(1, 1), kPi / 4);
  EXPECT_EQ(pulse_phase(-1, 1), 3 * kPi / 4);
  EXPECT_EQ(pulse_phase(-1, -1), 5 * kPi / 4);
  EXPECT_EQ(pulse_phase(1, -1), 7 * kPi / 4);
  const auto r = sample_noise(5, 200, {3}, 0.0075);
  const auto s = to_pulse_schedule(r, 1.0, 3);
  ASSERT_EQ(s.sections.size(), 200u);
  EXPECT_NEAR(s.sections[0].amplitude / kTwoPi, 1.8377629847393068, 1e-12);
  for (const auto& p : s.sections) {
    EXPECT_EQ(p.amplitude, s.sections[0].amplitude);
    EXPECT_EQ(p.phase, pulse_phase(r.eta(p.index, 0), r.eta(p.index, 1)));
    EXPECT_DOUBLE_EQ(p.start_us, 0.0075 * double(p.index));
  }
  EXPECT_NO_THROW(s.validate());
}

TEST(PulseSchedule, PulseHamiltonianEqualsNoiseHamiltonian) {
  const auto r = sample_noise(77, 40, {2}, 0.0075);
  const auto s = to_pulse_schedule(r, 1.3, 2);
  for (long i = 0; i < 40; ++i) {
    const auto& p = s.sections[std::size_t(i)];
    const CMatrix a = pulse_hamiltonian(p.amplitude, p.phase, 2, 3).dense();
    EXPECT_LT((a - noise_hamiltonian(r, i, 1.3, 2, 3).dense()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PulseSchedule, InvalidSchedulesRejected) {
  PulseSchedule s{1, {{0, 0.0, 0.0075, 1.0, kPi / 4}, {1, 0.0075, 0.0075, 1.1, kPi / 4}}};
  EXPECT_THROW(s.validate(), InvalidArgument);
  s.sections[1].amplitude = 1.0;
  s.sections[1].phase = kPi / 2;
  EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(PulseSchedule, CsvExport) {
  NoiseRealization r({1, 1, -1, -1}, 2, 0.0075, 0, {1});
  std::ostringstream os;
  write_pulse_csv(os, to_pulse_schedule(r, 1.0, 1));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "section,start_us,duration_us,amplitude_rad_per_us,phase_rad");
  std::getline(is, line);
  EXPECT_EQ(line, "0,0,0.0074999999999999997,11.547005383792516,0.78539816339744828");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 2), "1,");
  EXPECT_DOUBLE_EQ(std::stod(line.substr(line.rfind(',') + 1)), 5 * kPi / 4);
}

TEST(Rabi, CurveMatchesAnalytic) {
  const std::vector<double> T{0.0, 0.1, 0.25, 0.5, 0.8};
  const auto pe = rabi_curve(kTwoPi, T);
  EXPECT_EQ(pe[0], 0.0);
  for (std::size_t k = 0; k < T.size(); ++k) EXPECT_NEAR(pe[k], std::pow(std::sin(kPi * T[k]), 2), 1e-10);
  EXPECT_NEAR(pe[3], 1.0, 1e-10);
  const auto pe_y = rabi_curve(kTwoPi, T, kPi / 4);
  for (std::size_t k = 0; k < T.size(); ++k) EXPECT_NEAR(pe_y[k], pe[k], 1e-10);
}

TEST(Rabi, FitRecoversFrequency) {
  const double omega = rabi_from_gamma(1.0, 0.0075);  // 2 sqrt(gamma/dt)
  std::vector<double> T;
  for (int k = 0; k <= 40; ++k) T.push_back(0.01 * k);
  const auto fit = fit_rabi(T, rabi_curve(omega, T), 5.0, 60.0);
  EXPECT_LT(std::abs(fit.omega - omega) / omega, 1e-3);
  EXPECT_NEAR(gamma_from_rabi(fit.omega, 0.0075), 1.0, 2e-3);
}
