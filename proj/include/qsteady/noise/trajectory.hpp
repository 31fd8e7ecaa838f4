#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "qsteady/core/evolution.hpp"
#include "qsteady/noise/realization.hpp"

namespace qsteady::noise {

using core::DensityOperator;
using core::Hamiltonian;
using core::Jump;
using core::StateVector;
using core::TimeGrid;

/// Chain Hamiltonian plus Hermitian binary noise on `noisy_sites`, plus
/// optional decoherence channels.
struct TrajectoryModel {
  int qubits = 1;
  Hamiltonian chain;
  std::vector<Jump> decoherence;
  double gamma = 0.0;  // 1/us, per noisy site
  std::vector<int> noisy_sites;
  double dt_section = 0.0075;  // us
};

enum class DriveRoute { Eta, Pulse };
enum class DecoherenceMode { JumpChannels, Density };

inline constexpr int kMaxExactQubits = 10;
inline constexpr int kMaxExactNoisySites = 2;
inline constexpr int kMaxDensityQubits = 6;

struct TrajectoryOptions {
  DriveRoute route = DriveRoute::Eta;
  DecoherenceMode mode = DecoherenceMode::JumpChannels;
  bool exact = true;  // exact section propagators when the chain is static
};

/// Evolves single trajectories of the piecewise-constant noise model.
/// Immutable after construction; run() may be called from many threads.
class TrajectoryEngine {
 public:
  TrajectoryEngine(TrajectoryModel model, TimeGrid grid, std::vector<LinearOperator> observables,
                   TrajectoryOptions opt = {})
      : model_(std::move(model)), grid_(grid), obs_(std::move(observables)), opt_(opt) {
    grid_.validate();
    const Index dim = qsteady::dimension_of(model_.qubits);
    require(model_.chain.dim() == dim, "trajectory: chain Hamiltonian dimension differs from qubit count");
    require(model_.gamma >= 0.0, "trajectory: gamma must be non-negative");
    require(model_.dt_section > 0.0, "trajectory: dt_section must be positive");
    for (int s : model_.noisy_sites) require(s >= 1 && s <= model_.qubits, "trajectory: noisy site out of range");
    core::LindbladModel{model_.chain, model_.decoherence}.validate();
    for (const auto& o : obs_) {
      require(o.hermitian(), "trajectory observables must be Hermitian");
      require(o.dim() == dim, "trajectory observable dimension mismatch");
    }
    const double ratio = model_.dt_section / grid_.dt;
    sps_ = std::lround(ratio);
    if (sps_ < 1 || std::abs(ratio - double(sps_)) > 1e-9 * ratio)
      throw InvalidArgument("integration step " + std::to_string(grid_.dt) + " us does not divide the noise section " +
                            std::to_string(model_.dt_section) + " us");
    if (opt_.mode == DecoherenceMode::Density)
      require(model_.qubits <= kMaxDensityQubits, "density-mode trajectories are limited to 6 qubits");

    amp_ = noise_prefactor(model_.gamma, model_.dt_section);
    pulse_amp_ = std::sqrt(model_.gamma / model_.dt_section);
    for (int s : model_.noisy_sites) {
      sx_.push_back(core::single(Axis::X, s, model_.qubits).matrix());
      sy_.push_back(core::single(Axis::Y, s, model_.qubits).matrix());
    }
    decay_ = SparseMatrix(dim, dim);
    for (const auto& j : model_.decoherence) {
      if (j.rate == 0.0) continue;
      jump_ops_.push_back(j.op.matrix());
      jump_rates_.push_back(j.rate);
      decay_ += cplx(j.rate) * SparseMatrix(SparseMatrix(j.op.matrix().adjoint()) * j.op.matrix());
    }
    exact_ = opt_.exact && model_.chain.time_independent() && model_.qubits <= kMaxExactQubits &&
             int(model_.noisy_sites.size()) <= kMaxExactNoisySites && opt_.mode == DecoherenceMode::JumpChannels;
    if (exact_) build_propagators();
  }

  const TimeGrid& grid() const { return grid_; }
  const TrajectoryModel& model() const { return model_; }
  long steps_per_section() const { return sps_; }
  long sections_needed() const { return (grid_.n_steps + sps_ - 1) / sps_; }
  bool exact() const { return exact_; }
  bool has_jumps() const { return !jump_ops_.empty(); }
  std::size_t observable_count() const { return obs_.size(); }

  /// Noise from `seed` (noise stream), jump draws from the same seed (jump stream).
  RMatrix run_seed(std::uint64_t seed, const StateVector& psi0) const {
    const auto real = sample_noise(seed, sections_needed(), model_.noisy_sites, model_.dt_section);
    if (opt_.mode == DecoherenceMode::Density) return run_density(real, DensityOperator::pure(psi0));
    return run(real, psi0, seed);
  }

  /// Pure-state trajectory; rows are observables, columns sample times.
  RMatrix run(const NoiseRealization& real, const StateVector& psi0, std::uint64_t jump_seed) const {
    check_realization(real);
    require(psi0.dim() == model_.chain.dim(), "trajectory: initial state dimension mismatch");
    const auto patterns = section_patterns(real);
    RMatrix out(Index(obs_.size()), grid_.sample_count());
    CVector psi = psi0.amplitudes();
    record(out, 0, psi);

    PhiloxStream rng(jump_seed, stream::kJumps);
    const bool jumps = has_jumps();
    double threshold = jumps ? rng.uniform() : 0.0;
    core::Rk4Workspace ws;
    CVector trial;

    for (long s = 0; s < sections_needed(); ++s) {
      const long first = s * sps_, last = std::min(first + sps_, grid_.n_steps);
      const int p = patterns[std::size_t(s)];
      if (exact_ && last - first == sps_ && !sample_inside(first, last)) {
        trial.noalias() = section_[std::size_t(p)] * psi;
        if (!jumps || trial.squaredNorm() > threshold) {
          psi.swap(trial);
          if (!jumps) core::renormalize_checked(psi);
          if (last % grid_.sample_stride == 0) record(out, last / grid_.sample_stride, psi);
          continue;
        }
      }
      for (long n = first; n < last; ++n) {
        if (exact_) {
          trial.noalias() = step_[std::size_t(p)] * psi;
          psi.swap(trial);
        } else {
          rk4(n, p, psi, ws);
        }
        if (!jumps) {
          core::renormalize_checked(psi);
        } else if (psi.squaredNorm() <= threshold) {
          jump(psi, rng);
          threshold = rng.uniform();
        }
        if ((n + 1) % grid_.sample_stride == 0) record(out, (n + 1) / grid_.sample_stride, psi);
      }
    }
    return out;
  }

  /// Density-matrix trajectory: the noise Hamiltonian of this realization
  /// is added to the coherent part and the decoherence enters as Lindblad
  /// terms. RK4 per integration step.
  RMatrix run_density(const NoiseRealization& real, const DensityOperator& rho0) const {
    check_realization(real);
    require(model_.qubits <= kMaxDensityQubits, "density-mode trajectories are limited to 6 qubits");
    require(rho0.dim() == model_.chain.dim(), "trajectory: initial state dimension mismatch");
    const auto patterns = section_patterns(real);
    const core::LindbladModel lm{model_.chain, model_.decoherence};
    const core::LindbladGenerator gen(lm);
    RMatrix out(Index(obs_.size()), grid_.sample_count());
    record_density(out, 0, rho0);

    CMatrix rho = rho0.matrix();
    const Index d = rho.rows();
    CMatrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);
    for (long n = 0; n < grid_.n_steps; ++n) {
      const long s = n / sps_;
      const SparseMatrix hn = noise_matrix(patterns[std::size_t(s)]);
      auto f = [&](double t, const CMatrix& r, CMatrix& dr) {
        gen(t, r, dr);
        dr.noalias() += -kI * (hn * r);
        dr.noalias() += kI * (r * hn);
      };
      const double t = grid_.time_at_step(n), dt = grid_.dt;
      f(t, rho, k1);
      tmp = rho + (0.5 * dt) * k1;
      f(t + 0.5 * dt, tmp, k2);
      tmp = rho + (0.5 * dt) * k2;
      f(t + 0.5 * dt, tmp, k3);
      tmp = rho + dt * k3;
      f(t + dt, tmp, k4);
      rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if ((n + 1) % grid_.sample_stride == 0) {
        try {
          record_density(out, (n + 1) / grid_.sample_stride, DensityOperator(model_.qubits, rho));
        } catch (const Error& e) {
          throw NumericalError(std::string("density trajectory left the physical set: ") + e.what());
        }
      }
    }
    return out;
  }

  /// Hermitian noise term for a pattern index, built along the selected route.
  SparseMatrix noise_matrix(int pattern) const {
    SparseMatrix h(model_.chain.dim(), model_.chain.dim());
    for (std::size_t k = 0; k < sx_.size(); ++k) {
      const int code = (pattern >> (2 * k)) & 3;
      double cx, cy;
      if (opt_.route == DriveRoute::Eta) {
        const auto e = eta_from_code(code);
        cx = amp_ * e[0];
        cy = amp_ * e[1];
      } else {
        const double th = kPulsePhases[std::size_t(code)];
        cx = pulse_amp_ * std::cos(th);
        cy = pulse_amp_ * std::sin(th);
      }
      h += cplx(cx) * sx_[k] + cplx(cy) * sy_[k];
    }
    return h;
  }

 private:
  // Eta route: code bit 0 set <=> eta_1 = +1, bit 1 set <=> eta_2 = +1.
  static std::array<int, 2> eta_from_code(int code) { return {(code & 1) ? 1 : -1, (code & 2) ? 1 : -1}; }
  static int code_from_eta(int e1, int e2) { return (e1 > 0 ? 1 : 0) | (e2 > 0 ? 2 : 0); }

  void check_realization(const NoiseRealization& real) const {
    require(real.n_sections() >= sections_needed(), "noise realization is shorter than the time grid");
    require(real.sites() == model_.noisy_sites, "noise realization sites differ from the model");
    require(std::abs(real.dt_section() - model_.dt_section) <= 1e-12 * model_.dt_section,
            "noise realization section length differs from the model");
  }

  /// Per-section pattern index. On the pulse route the index is read from the
  /// pulse schedule (phase slot) rather than from eta.
  std::vector<int> section_patterns(const NoiseRealization& real) const {
    std::vector<int> out(std::size_t(sections_needed()), 0);
    if (opt_.route == DriveRoute::Eta) {
      for (long s = 0; s < sections_needed(); ++s)
        for (std::size_t k = 0; k < model_.noisy_sites.size(); ++k) {
          const auto e = real.pair(s, int(k));
          out[std::size_t(s)] |= code_from_eta(e[0], e[1]) << (2 * k);
        }
    } else {
      for (std::size_t k = 0; k < model_.noisy_sites.size(); ++k) {
        const auto sched = to_pulse_schedule(real, model_.gamma, model_.noisy_sites[k]);
        for (long s = 0; s < sections_needed(); ++s)
          out[std::size_t(s)] |= PulseSchedule::phase_slot(sched.sections[std::size_t(s)].phase) << (2 * k);
      }
    }
    return out;
  }

  void build_propagators() {
    const int n_patterns = 1 << (2 * int(model_.noisy_sites.size()));
    const CMatrix h0 = model_.chain.static_part().dense();
    const CMatrix k = CMatrix(decay_);
    for (int p = 0; p < n_patterns; ++p) {
      const CMatrix h = h0 + CMatrix(noise_matrix(p));
      if (!has_jumps()) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
        const CMatrix& v = es.eigenvectors();
        auto u = [&](double t) {
          CVector ph(v.rows());
          for (Index i = 0; i < ph.size(); ++i) ph(i) = std::exp(cplx(0.0, -es.eigenvalues()(i) * t));
          return CMatrix(v * ph.asDiagonal() * v.adjoint());
        };
        step_.push_back(u(grid_.dt));
        section_.push_back(u(model_.dt_section));
      } else {
        const CMatrix heff = h - 0.5 * kI * k;
        step_.push_back(CMatrix(-kI * grid_.dt * heff).exp());
        section_.push_back(CMatrix(-kI * model_.dt_section * heff).exp());
      }
    }
  }

  /// True when a sample point falls strictly inside (first, last).
  bool sample_inside(long first, long last) const {
    const long stride = grid_.sample_stride;
    const long next = (first / stride + 1) * stride;
    return next < last;
  }

  void rk4(long n, int pattern, CVector& psi, core::Rk4Workspace& ws) const {
    const SparseMatrix hn = noise_matrix(pattern);
    const bool jumps = has_jumps();
    auto rhs = [&](double t, const CVector& x, CVector& y) {
      model_.chain.apply(t, x, y);
      y.noalias() += hn * x;
      if (jumps) y.noalias() += -0.5 * kI * (decay_ * x);
      y *= -kI;
    };
    core::rk4_step(rhs, grid_.time_at_step(n), grid_.dt, psi, ws);
  }

  void jump(CVector& psi, PhiloxStream& rng) const {
    std::vector<double> w(jump_ops_.size());
    double total = 0.0;
    std::vector<CVector> cand(jump_ops_.size());
    for (std::size_t k = 0; k < jump_ops_.size(); ++k) {
      cand[k] = jump_ops_[k] * psi;
      w[k] = jump_rates_[k] * cand[k].squaredNorm();
      total += w[k];
    }
    if (!(total > 0.0)) throw NumericalError("quantum jump with vanishing total rate");
    double u = rng.uniform() * total;
    std::size_t pick = jump_ops_.size() - 1;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (u < w[k]) {
        pick = k;
        break;
      }
      u -= w[k];
    }
    psi = cand[pick] / cand[pick].norm();
  }

  void record(RMatrix& out, Index col, const CVector& psi) const {
    for (std::size_t o = 0; o < obs_.size(); ++o) out(Index(o), col) = core::expectation_raw(obs_[o].matrix(), psi);
  }

  void record_density(RMatrix& out, Index col, const DensityOperator& rho) const {
    for (std::size_t o = 0; o < obs_.size(); ++o) out(Index(o), col) = core::expectation(obs_[o], rho);
  }

  TrajectoryModel model_;
  TimeGrid grid_;
  std::vector<LinearOperator> obs_;
  TrajectoryOptions opt_;
  long sps_ = 1;
  double amp_ = 0.0, pulse_amp_ = 0.0;
  std::vector<SparseMatrix> sx_, sy_, jump_ops_;
  std::vector<double> jump_rates_;
  SparseMatrix decay_;
  bool exact_ = false;
  std::vector<CMatrix> step_, section_;
};

}  // namespace qsteady::noise
