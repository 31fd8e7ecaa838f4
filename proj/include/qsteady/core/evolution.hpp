#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qsteady/core/states.hpp"

namespace qsteady::core {

/// Uniform integration grid. Samples are taken at steps 0, stride, 2*stride, ...
struct TimeGrid {
  double t_start = 0.0;
  double dt = 1e-3;  // us
  long n_steps = 1;
  long sample_stride = 1;

  void validate() const {
    require(dt > 0.0, "time grid: dt_integration must be positive");
    require(n_steps >= 1, "time grid: n_steps must be >= 1");
    require(sample_stride >= 1, "time grid: sample_stride must be >= 1");
    require(n_steps % sample_stride == 0, "time grid: sample_stride must divide n_steps");
  }

  double time_at_step(long n) const { return t_start + double(n) * dt; }
  long sample_count() const { return n_steps / sample_stride + 1; }
  double sample_time(long k) const { return time_at_step(k * sample_stride); }
  double duration() const { return double(n_steps) * dt; }

  std::vector<double> sample_times() const {
    std::vector<double> t(static_cast<std::size_t>(sample_count()));
    for (long k = 0; k < sample_count(); ++k) t[static_cast<std::size_t>(k)] = sample_time(k);
    return t;
  }

  /// Grid of `n_samples` intervals over `duration` with `substeps` integration
  /// steps per interval.
  static TimeGrid spanning(double duration, long n_samples, long substeps) {
    require(duration > 0.0 && n_samples >= 1 && substeps >= 1, "invalid grid request");
    TimeGrid g;
    g.n_steps = n_samples * substeps;
    g.dt = duration / double(g.n_steps);
    g.sample_stride = substeps;
    return g;
  }
};

/// Hermitian term with a real time-dependent coefficient.
struct DriveTerm {
  LinearOperator op;
  std::function<double(double)> coefficient;
};

/// H(t) = H_0 + sum_k c_k(t) A_k with every operator Hermitian and every
/// coefficient real, so H(t) is Hermitian for all t.
class Hamiltonian {
 public:
  Hamiltonian() = default;

  explicit Hamiltonian(LinearOperator static_part, std::vector<DriveTerm> drives = {})
      : h0_(std::move(static_part)), drives_(std::move(drives)) {
    require(h0_.hermitian(), "Hamiltonian static part must be Hermitian");
    for (const auto& d : drives_) {
      require(d.op.hermitian(), "Hamiltonian drive operators must be Hermitian");
      require(d.op.dim() == h0_.dim(), "Hamiltonian drive dimension mismatch");
      require(static_cast<bool>(d.coefficient), "Hamiltonian drive needs a coefficient");
    }
  }

  bool time_independent() const { return drives_.empty(); }
  Index dim() const { return h0_.dim(); }
  const LinearOperator& static_part() const { return h0_; }
  const std::vector<DriveTerm>& drives() const { return drives_; }

  LinearOperator at(double t) const {
    SparseMatrix m = h0_.matrix();
    for (const auto& d : drives_) m += cplx(d.coefficient(t)) * d.op.matrix();
    return LinearOperator(std::move(m), true);
  }

  /// y = H(t) x
  void apply(double t, const CVector& x, CVector& y) const {
    y.noalias() = h0_.matrix() * x;
    for (const auto& d : drives_) {
      const double c = d.coefficient(t);
      if (c != 0.0) y.noalias() += cplx(c) * (d.op.matrix() * x);
    }
  }

 private:
  LinearOperator h0_;
  std::vector<DriveTerm> drives_;
};

/// Scratch space for the classical RK4 step.
struct Rk4Workspace {
  CVector k1, k2, k3, k4, tmp;
  void resize(Index n) {
    if (k1.size() != n) {
      k1.resize(n); k2.resize(n); k3.resize(n); k4.resize(n); tmp.resize(n);
    }
  }
};

/// One classical RK4 step of d psi/dt = f(t, psi), where rhs(t, x, y) writes f into y.
template <class Rhs>
void rk4_step(Rhs&& rhs, double t, double dt, CVector& psi, Rk4Workspace& ws) {
  ws.resize(psi.size());
  rhs(t, psi, ws.k1);
  ws.tmp = psi + (0.5 * dt) * ws.k1;
  rhs(t + 0.5 * dt, ws.tmp, ws.k2);
  ws.tmp = psi + (0.5 * dt) * ws.k2;
  rhs(t + 0.5 * dt, ws.tmp, ws.k3);
  ws.tmp = psi + dt * ws.k3;
  rhs(t + dt, ws.tmp, ws.k4);
  psi += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

/// Renormalizes psi after a Hermitian step. Returns the applied correction
/// |norm - 1|; throws when it signals an unstable step size.
inline double renormalize_checked(CVector& psi, double instability_threshold = 1e-6) {
  const double n = psi.norm();
  const double drift = std::abs(n - 1.0);
  if (!(drift <= instability_threshold))
    throw NumericalError("norm drift " + std::to_string(drift) + " in one step: step size unstable");
  psi /= n;
  return drift;
}

struct StateEvolution {
  std::vector<double> times;
  std::vector<StateVector> states;
  double max_norm_correction = 0.0;
};

/// Schrodinger evolution by RK4 with per-step renormalization.
inline StateEvolution evolve_state(const Hamiltonian& h, const StateVector& psi0, const TimeGrid& grid) {
  grid.validate();
  require(h.dim() == psi0.dim(), "Hamiltonian and state dimensions differ");
  StateEvolution out;
  out.times = grid.sample_times();
  out.states.reserve(out.times.size());
  out.states.push_back(psi0);

  auto rhs = [&h](double t, const CVector& x, CVector& y) {
    h.apply(t, x, y);
    y *= -kI;
  };
  CVector psi = psi0.amplitudes();
  Rk4Workspace ws;
  for (long n = 0; n < grid.n_steps; ++n) {
    rk4_step(rhs, grid.time_at_step(n), grid.dt, psi, ws);
    out.max_norm_correction = std::max(out.max_norm_correction, renormalize_checked(psi));
    if ((n + 1) % grid.sample_stride == 0) out.states.emplace_back(psi0.qubits(), psi);
  }
  return out;
}

/// Jump operator L with rate r; contributes r (L rho L^+ - {L^+ L, rho}/2).
struct Jump {
  LinearOperator op;
  double rate = 0.0;
};

struct LindbladModel {
  Hamiltonian hamiltonian;
  std::vector<Jump> jumps;

  void validate() const {
    for (const auto& j : jumps) {
      require(j.rate >= 0.0, "jump rates must be non-negative");
      require(j.op.dim() == hamiltonian.dim(), "jump operator dimension differs from the Hamiltonian");
    }
  }
};

/// Precomputed pieces of the Lindblad right-hand side.
class LindbladGenerator {
 public:
  explicit LindbladGenerator(const LindbladModel& model) : model_(&model) {
    model.validate();
    const Index d = model.hamiltonian.dim();
    decay_ = SparseMatrix(d, d);
    for (const auto& j : model.jumps) {
      if (j.rate == 0.0) continue;
      SparseMatrix l = std::sqrt(j.rate) * j.op.matrix();
      SparseMatrix ld = l.adjoint();
      decay_ += SparseMatrix(ld * l);
      ops_.push_back(std::move(l));
      adj_.push_back(std::move(ld));
    }
    decay_ *= cplx(0.5);
  }

  /// drho = -i[H(t), rho] - {K, rho}/2 + sum L rho L^+, with K = sum L^+ L.
  void operator()(double t, const CMatrix& rho, CMatrix& drho) const {
    const auto& h = model_->hamiltonian;
    SparseMatrix heff = h.at(t).matrix();
    heff = heff - kI * decay_;  // H - i K/2
    SparseMatrix heff_adj = heff.adjoint();
    drho.noalias() = -kI * (heff * rho);
    drho.noalias() += kI * (rho * heff_adj);
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      CMatrix lr = ops_[k] * rho;
      drho.noalias() += lr * adj_[k];
    }
  }

 private:
  const LindbladModel* model_;
  SparseMatrix decay_;
  std::vector<SparseMatrix> ops_, adj_;
};

struct DensityEvolution {
  std::vector<double> times;
  std::vector<DensityOperator> states;
};

/// RK4 integration of the Lindblad equation. Every returned sample satisfies
/// the DensityOperator invariants; a violation means the step is too large.
inline DensityEvolution evolve_density(const LindbladModel& model, const DensityOperator& rho0,
                                       const TimeGrid& grid) {
  grid.validate();
  require(model.hamiltonian.dim() == rho0.dim(), "model and state dimensions differ");
  LindbladGenerator gen(model);
  DensityEvolution out;
  out.times = grid.sample_times();
  out.states.push_back(rho0);

  CMatrix rho = rho0.matrix();
  const Index d = rho.rows();
  CMatrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);
  for (long n = 0; n < grid.n_steps; ++n) {
    const double t = grid.time_at_step(n), dt = grid.dt;
    gen(t, rho, k1);
    tmp = rho + (0.5 * dt) * k1;
    gen(t + 0.5 * dt, tmp, k2);
    tmp = rho + (0.5 * dt) * k2;
    gen(t + 0.5 * dt, tmp, k3);
    tmp = rho + dt * k3;
    gen(t + dt, tmp, k4);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((n + 1) % grid.sample_stride == 0) {
      try {
        out.states.emplace_back(rho0.qubits(), rho);
      } catch (const Error& e) {
        throw NumericalError(std::string("density evolution left the physical set (step too large?): ") + e.what());
      }
    }
  }
  return out;
}

}  // namespace qsteady::core
