#pragma once

#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "qsteady/chain/floquet.hpp"
#include "qsteady/chain/spec.hpp"

// Field names carry their units: *_over_2pi_MHz values are multiplied by 2 pi
// to give rad/us, *_per_us are rates, *_us are times.

namespace qsteady::chain {

using nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("config: missing field '") + key + "'");
  return j.at(key);
}

/// Scalar broadcast to n entries, or an array of exactly n.
inline std::vector<double> broadcast(const json& v, std::size_t n, const char* key, double scale = 1.0) {
  std::vector<double> out;
  if (v.is_number()) {
    out.assign(n, v.get<double>() * scale);
  } else if (v.is_array()) {
    for (const auto& x : v) {
      if (x.is_null()) out.push_back(std::numeric_limits<double>::infinity());
      else out.push_back(x.get<double>() * scale);
    }
    if (out.size() != n) throw InvalidArgument(std::string("config: '") + key + "' has " + std::to_string(out.size()) + " entries, expected " + std::to_string(n));
  } else if (v.is_null()) {
    out.assign(n, std::numeric_limits<double>::infinity());
  } else {
    throw InvalidArgument(std::string("config: '") + key + "' must be a number or an array");
  }
  return out;
}

inline std::vector<double> unscale(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) out.push_back(x / kTwoPi);
  return out;
}

inline json times_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
  return a;
}

}  // namespace detail

/// {"L", "J_over_2pi_MHz", "J2_over_2pi_MHz"} or a disordered baseline
/// {"L", "J_over_2pi_MHz": scalar, "J2_over_2pi_MHz": scalar,
///  "disorder": {"fraction", "seed"}}.
inline ChainSpec chain_from_json(const json& j) {
  const int L = detail::field(j, "L").get<int>();
  require(L >= 1, "config: L must be >= 1");
  const std::size_t n1 = std::size_t(std::max(L - 1, 0)), n2 = std::size_t(std::max(L - 2, 0));
  if (j.contains("disorder")) {
    const auto& d = j.at("disorder");
    ChainSpec s = disordered_baseline(L, detail::field(j, "J_over_2pi_MHz").get<double>() * kTwoPi,
                                      detail::field(d, "fraction").get<double>(),
                                      j.value("J2_over_2pi_MHz", 0.0) * kTwoPi, detail::field(d, "seed").get<std::uint64_t>());
    return s;
  }
  ChainSpec s;
  s.L = L;
  s.J = detail::broadcast(detail::field(j, "J_over_2pi_MHz"), n1, "J_over_2pi_MHz", kTwoPi);
  s.J2 = j.contains("J2_over_2pi_MHz") ? detail::broadcast(j.at("J2_over_2pi_MHz"), n2, "J2_over_2pi_MHz", kTwoPi)
                                       : std::vector<double>(n2, 0.0);
  s.validate();
  return s;
}

inline json to_json(const ChainSpec& s) {
  return {{"L", s.L}, {"J_over_2pi_MHz", detail::unscale(s.J)}, {"J2_over_2pi_MHz", detail::unscale(s.J2)}};
}

/// {"preset": "reference"} or explicit fields:
/// {"L", "idle_freqs_over_2pi_MHz": [...], "g_over_2pi_MHz", "g2_over_2pi_MHz",
///  "modulations": [{"site", "nu_over_2pi_MHz", "eps_over_nu" | "eps_over_2pi_MHz", "phase_rad"}]}
inline FloquetDeviceSpec device_from_json(const json& j) {
  if (j.contains("preset")) {
    require(j.at("preset") == "reference", "config: unknown device preset");
    DeviceDefaults d;
    d.g_over_2pi_mhz = j.value("g_over_2pi_MHz", d.g_over_2pi_mhz);
    d.g2_over_2pi_mhz = j.value("g2_over_2pi_MHz", d.g2_over_2pi_mhz);
    d.depth = j.value("eps_over_nu", d.depth);
    return reference_device(d);
  }
  FloquetDeviceSpec dev;
  dev.L = detail::field(j, "L").get<int>();
  require(dev.L >= 2, "config: device needs L >= 2");
  dev.omega = detail::broadcast(detail::field(j, "idle_freqs_over_2pi_MHz"), std::size_t(dev.L), "idle_freqs_over_2pi_MHz", kTwoPi);
  dev.g = detail::broadcast(detail::field(j, "g_over_2pi_MHz"), std::size_t(dev.L - 1), "g_over_2pi_MHz", kTwoPi);
  if (j.contains("g2_over_2pi_MHz") && dev.L >= 3)
    dev.g2 = detail::broadcast(j.at("g2_over_2pi_MHz"), std::size_t(dev.L - 2), "g2_over_2pi_MHz", kTwoPi);
  dev.tones.resize(std::size_t(dev.L));
  for (const auto& m : j.value("modulations", json::array())) {
    const int site = detail::field(m, "site").get<int>();
    require(site >= 1 && site <= dev.L, "config: modulation site out of range");
    Tone t;
    t.nu = detail::field(m, "nu_over_2pi_MHz").get<double>() * kTwoPi;
    if (m.contains("eps_over_nu")) t.eps = m.at("eps_over_nu").get<double>() * t.nu;
    else t.eps = detail::field(m, "eps_over_2pi_MHz").get<double>() * kTwoPi;
    t.phase = m.value("phase_rad", 0.0);
    dev.tones[std::size_t(site - 1)].push_back(t);
  }
  dev.check_resonance();
  return dev;
}

inline json to_json(const FloquetDeviceSpec& d) {
  json mods = json::array();
  for (int j = 1; j <= d.L; ++j)
    for (const auto& t : d.tones_at(j))
      mods.push_back({{"site", j}, {"nu_over_2pi_MHz", t.nu / kTwoPi}, {"eps_over_2pi_MHz", t.eps / kTwoPi}, {"phase_rad", t.phase}});
  return {{"L", d.L},
          {"idle_freqs_over_2pi_MHz", detail::unscale(d.omega)},
          {"g_over_2pi_MHz", detail::unscale(d.g)},
          {"g2_over_2pi_MHz", detail::unscale(d.g2)},
          {"modulations", mods}};
}

/// {"site" (0 = center), "gamma_plus_per_us", "gamma_minus_per_us",
///  "T1_us", "Tphi_us"} with times as a scalar, an array, or null for none.
inline DissipationSpec dissipation_from_json(const json& j, int L) {
  DissipationSpec d;
  d.site = j.value("site", 0);
  require(d.site >= 0 && d.site <= L, "config: dissipation site out of range");
  if (j.contains("gamma_per_us")) d.gamma_plus = d.gamma_minus = j.at("gamma_per_us").get<double>();
  d.gamma_plus = j.value("gamma_plus_per_us", d.gamma_plus);
  d.gamma_minus = j.value("gamma_minus_per_us", d.gamma_minus);
  require(d.gamma_plus >= 0.0 && d.gamma_minus >= 0.0, "config: rates must be non-negative");
  if (j.contains("T1_us") && !j.at("T1_us").is_null()) d.T1 = detail::broadcast(j.at("T1_us"), std::size_t(L), "T1_us");
  if (j.contains("Tphi_us") && !j.at("Tphi_us").is_null()) d.Tphi = detail::broadcast(j.at("Tphi_us"), std::size_t(L), "Tphi_us");
  for (double t : d.T1) require(t > 0.0, "config: T1 must be positive");
  for (double t : d.Tphi) require(t > 0.0, "config: Tphi must be positive");
  return d;
}

inline json to_json(const DissipationSpec& d) {
  json j{{"site", d.site}, {"gamma_plus_per_us", d.gamma_plus}, {"gamma_minus_per_us", d.gamma_minus}};
  j["T1_us"] = d.T1.empty() ? json(nullptr) : detail::times_json(d.T1);
  j["Tphi_us"] = d.Tphi.empty() ? json(nullptr) : detail::times_json(d.Tphi);
  return j;
}

}  // namespace qsteady::chain
