#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "qsteady/noise/trajectory.hpp"

namespace qsteady::noise {

/// Trajectory-averaged observables. mean and sem are (observable x time).
struct EnsembleResult {
  std::vector<double> times;
  std::vector<std::string> observables;
  RMatrix mean;
  RMatrix sem;  // sample standard deviation (ddof = 1) / sqrt(M); zero for M = 1
  long M = 0;
  std::vector<std::uint64_t> seeds;

  Index row(const std::string& id) const {
    for (std::size_t k = 0; k < observables.size(); ++k)
      if (observables[k] == id) return Index(k);
    throw InvalidArgument("ensemble has no observable '" + id + "'");
  }
};

/// One trajectory per seed; returns an (observable x time) matrix.
using TrajectoryFn = std::function<RMatrix(std::uint64_t)>;

inline std::vector<std::uint64_t> consecutive_seeds(std::uint64_t base, long M) {
  require(M >= 1, "seed list needs M >= 1");
  std::vector<std::uint64_t> s(static_cast<std::size_t>(M));
  for (long i = 0; i < M; ++i) s[std::size_t(i)] = base + std::uint64_t(i);
  return s;
}

/// Runs fn(seed) for every seed on `workers` threads and reduces in seed-list
/// order (Welford), so the result does not depend on the schedule.
inline EnsembleResult run_ensemble(const std::vector<double>& times, std::vector<std::string> ids,
                                   const std::vector<std::uint64_t>& seeds, const TrajectoryFn& fn, int workers = 1) {
  require(!seeds.empty(), "run_ensemble: M must be >= 1");
  require(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(),
          "run_ensemble: duplicate seeds in seed list");
  require(workers >= 1, "run_ensemble: workers must be >= 1");
  const std::size_t M = seeds.size();

  std::vector<RMatrix> slot(M);
  std::vector<std::exception_ptr> err(M);
  std::vector<char> done(M, 0);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= M || stop.load()) return;
      RMatrix r;
      std::exception_ptr e;
      try {
        r = fn(seeds[i]);
      } catch (...) {
        e = std::current_exception();
      }
      {
        std::lock_guard<std::mutex> lk(mu);
        slot[i] = std::move(r);
        err[i] = e;
        done[i] = 1;
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  const int n_threads = int(std::min<std::size_t>(std::size_t(workers), M));
  if (n_threads > 1)
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(work);

  EnsembleResult out;
  out.times = times;
  out.observables = std::move(ids);
  out.M = long(M);
  out.seeds = seeds;
  RMatrix m2;
  std::exception_ptr failure;
  for (std::size_t i = 0; i < M; ++i) {
    RMatrix x;
    if (n_threads <= 1) {
      x = fn(seeds[i]);
    } else {
      std::unique_lock<std::mutex> lk(mu);
      cv.wait(lk, [&] { return done[i] != 0; });
      if (err[i]) {
        failure = err[i];
        stop = true;
        break;
      }
      x = std::move(slot[i]);
      slot[i] = RMatrix();
    }
    if (i == 0) {
      require(x.cols() == Index(out.times.size()) && x.rows() == Index(out.observables.size()),
              "run_ensemble: trajectory output shape does not match times x observables");
      out.mean = RMatrix::Zero(x.rows(), x.cols());
      m2 = RMatrix::Zero(x.rows(), x.cols());
    }
    require(x.rows() == out.mean.rows() && x.cols() == out.mean.cols(), "run_ensemble: inconsistent trajectory shape");
    const RMatrix delta = x - out.mean;
    out.mean += delta / double(i + 1);
    m2 += delta.cwiseProduct(x - out.mean);
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  if (M == 1)
    out.sem = RMatrix::Zero(out.mean.rows(), out.mean.cols());
  else
    out.sem = (m2 / double(M - 1)).cwiseMax(0.0).cwiseSqrt() / std::sqrt(double(M));
  return out;
}

/// Ensemble of engine trajectories from one initial state.
inline EnsembleResult run_ensemble(const TrajectoryEngine& engine, const StateVector& psi0,
                                   const std::vector<std::string>& ids, const std::vector<std::uint64_t>& seeds,
                                   int workers = 1) {
  return run_ensemble(engine.grid().sample_times(), ids, seeds,
                      [&](std::uint64_t s) { return engine.run_seed(s, psi0); }, workers);
}

/// Quantum-jump unravelling of a time-independent Lindblad model: the same
/// engine with the noise switched off and the jumps as channels.
inline EnsembleResult mcwf_reference(const core::LindbladModel& model, const StateVector& psi0, const TimeGrid& grid,
                                     const std::vector<LinearOperator>& observables, const std::vector<std::string>& ids,
                                     const std::vector<std::uint64_t>& seeds, int workers = 1) {
  require(model.hamiltonian.time_independent(), "mcwf_reference requires a time-independent Hamiltonian");
  TrajectoryModel tm;
  tm.qubits = psi0.qubits();
  tm.chain = model.hamiltonian;
  tm.decoherence = model.jumps;
  tm.dt_section = grid.dt;
  const TrajectoryEngine engine(std::move(tm), grid, observables);
  return run_ensemble(engine, psi0, ids, seeds, workers);
}

}  // namespace qsteady::noise
