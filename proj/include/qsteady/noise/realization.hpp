#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "qsteady/core/operators.hpp"
#include "qsteady/noise/philox.hpp"

namespace qsteady::noise {

using core::Axis;
using core::LinearOperator;

/// Binary draws eta in {+1, -1}, one row per section, two channels per
/// dissipative site (x then y).
class NoiseRealization {
 public:
  NoiseRealization() = default;
  NoiseRealization(std::vector<std::int8_t> eta, long n_sections, double dt_section, std::uint64_t seed,
                   std::vector<int> sites)
      : eta_(std::move(eta)), n_sections_(n_sections), dt_(dt_section), seed_(seed), sites_(std::move(sites)) {
    require(n_sections_ >= 1, "noise realization needs at least one section");
    require(dt_ > 0.0, "noise realization: dt_section must be positive");
    require(eta_.size() == std::size_t(n_sections_) * std::size_t(channels()), "noise realization: shape mismatch");
    for (auto e : eta_) require(e == 1 || e == -1, "noise realization: entries must be +1 or -1");
  }

  long n_sections() const { return n_sections_; }
  int channels() const { return 2 * int(sites_.size()); }
  double dt_section() const { return dt_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<int>& sites() const { return sites_; }
  const std::vector<std::int8_t>& data() const { return eta_; }

  int eta(long section, int channel) const {
    return eta_[std::size_t(section) * std::size_t(channels()) + std::size_t(channel)];
  }
  /// (eta_1, eta_2) for the k-th dissipative site.
  std::array<int, 2> pair(long section, int k) const { return {eta(section, 2 * k), eta(section, 2 * k + 1)}; }

  int site_index(int site) const {
    for (std::size_t k = 0; k < sites_.size(); ++k)
      if (sites_[k] == site) return int(k);
    throw InvalidArgument("site " + std::to_string(site) + " is not dissipative in this realization");
  }

 private:
  std::vector<std::int8_t> eta_;
  long n_sections_ = 0;
  double dt_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<int> sites_;
};

inline constexpr int kMaxNoiseChannels = 256;

/// Section i uses counter (i, 0, 0, 0) under key (seed, "noise"); channel c
/// reads bit c % 64 of word c / 64. Bit set means +1.
inline NoiseRealization sample_noise(std::uint64_t seed, long n_sections, const std::vector<int>& sites,
                                     double dt_section) {
  require(n_sections >= 1, "sample_noise: n_sections must be >= 1");
  require(std::set<int>(sites.begin(), sites.end()).size() == sites.size(), "sample_noise: duplicate site");
  const int ch = 2 * int(sites.size());
  require(ch <= kMaxNoiseChannels, "sample_noise: too many dissipative sites");
  std::vector<std::int8_t> eta(std::size_t(n_sections) * std::size_t(ch));
  const Philox4x64::Key key{seed, stream::kNoise};
  for (long i = 0; i < n_sections; ++i) {
    if (ch == 0) break;
    const auto block = Philox4x64::block({std::uint64_t(i), 0, 0, 0}, key);
    for (int c = 0; c < ch; ++c) {
      const bool bit = (block[std::size_t(c / 64)] >> (c % 64)) & 1u;
      eta[std::size_t(i) * std::size_t(ch) + std::size_t(c)] = bit ? 1 : -1;
    }
  }
  return NoiseRealization(std::move(eta), n_sections, dt_section, seed, sites);
}

/// sqrt(gamma / 2 dt) (eta_1 sx + eta_2 sy) on one site.
inline double noise_prefactor(double gamma, double dt_section) {
  require(gamma >= 0.0, "noise strength gamma must be non-negative");
  return std::sqrt(gamma / (2.0 * dt_section));
}

inline LinearOperator noise_hamiltonian(const NoiseRealization& real, long section, double gamma, int site, int qubits) {
  require(section >= 0 && section < real.n_sections(), "noise_hamiltonian: section index out of range");
  const auto e = real.pair(section, real.site_index(site));
  const double a = noise_prefactor(gamma, real.dt_section());
  return core::linear_combination({{a * e[0], core::single(Axis::X, site, qubits)},
                                   {a * e[1], core::single(Axis::Y, site, qubits)}},
                                  qsteady::dimension_of(qubits));
}

// ---------------------------------------------------------------------------
// Pulse representation

inline constexpr std::array<double, 4> kPulsePhases{kPi / 4, 3 * kPi / 4, 5 * kPi / 4, 7 * kPi / 4};

struct PulseSection {
  long index = 0;
  double start_us = 0.0;
  double duration_us = 0.0;
  double amplitude = 0.0;  // rad/us, coefficient of (cos th sx + sin th sy)
  double phase = 0.0;      // rad
};

/// Fixed-amplitude XY pulse train for one dissipative site.
struct PulseSchedule {
  int site = 0;
  std::vector<PulseSection> sections;

  void validate() const {
    for (const auto& s : sections) {
      require(s.amplitude == sections.front().amplitude, "pulse schedule: amplitude must be constant");
      bool ok = false;
      for (double p : kPulsePhases) ok = ok || s.phase == p;
      require(ok, "pulse schedule: phase outside {pi/4, 3pi/4, 5pi/4, 7pi/4}");
    }
  }

  /// Index of the phase in kPulsePhases.
  static int phase_slot(double phase) {
    for (int k = 0; k < 4; ++k)
      if (phase == kPulsePhases[std::size_t(k)]) return k;
    throw InvalidArgument("not a pulse phase");
  }
};

/// atan2(eta2, eta1) folded into [0, 2 pi). The result is snapped onto the
/// canonical double for each quadrant so that equality tests are exact.
inline double pulse_phase(int eta1, int eta2) {
  double th = std::atan2(double(eta2), double(eta1));
  if (th < 0.0) th += kTwoPi;
  for (double p : kPulsePhases)
    if (std::abs(th - p) < 1e-12) return p;
  throw InvalidArgument("pulse_phase: eta must be +-1");
}

inline PulseSchedule to_pulse_schedule(const NoiseRealization& real, double gamma, int site) {
  const int k = real.site_index(site);
  const double amp = std::sqrt(gamma / real.dt_section());
  PulseSchedule out;
  out.site = site;
  out.sections.reserve(std::size_t(real.n_sections()));
  for (long i = 0; i < real.n_sections(); ++i) {
    const auto e = real.pair(i, k);
    out.sections.push_back({i, double(i) * real.dt_section(), real.dt_section(), amp, pulse_phase(e[0], e[1])});
  }
  out.validate();
  return out;
}

/// Omega (cos th sx + sin th sy) on the schedule's site.
inline LinearOperator pulse_hamiltonian(double amplitude, double phase, int site, int qubits) {
  return core::linear_combination({{amplitude * std::cos(phase), core::single(Axis::X, site, qubits)},
                                   {amplitude * std::sin(phase), core::single(Axis::Y, site, qubits)}},
                                  qsteady::dimension_of(qubits));
}

inline constexpr const char* kPulseCsvHeader = "section,start_us,duration_us,amplitude_rad_per_us,phase_rad";

inline void write_pulse_csv(std::ostream& os, const PulseSchedule& s) {
  os << kPulseCsvHeader << '\n';
  char buf[256];
  for (const auto& p : s.sections) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g\n", p.index, p.start_us, p.duration_us, p.amplitude,
                  p.phase);
    os << buf;
  }
}

}  // namespace qsteady::noise
