#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qsteady/noise/ensemble.hpp"

namespace qsteady::xprun {

inline constexpr const char* kTimeSeriesHeader = "time_us,observable_id,mean,sem,M";
inline constexpr const char* kWalkHeader = "time_us,site,mean_n";

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
  require(std::isfinite(x), "csv: refusing to write a non-finite value");
  if (x == 0.0) x = 0.0;  // no "-0"
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& s) {
  double x = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw IoError("csv: bad number '" + s + "'");
  return x;
}

inline long parse_long(const std::string& s) {
  long x = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw IoError("csv: bad integer '" + s + "'");
  return x;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct TimeSeriesRow {
  double time_us = 0.0;
  std::string observable_id;
  double mean = 0.0;
  double sem = 0.0;
  long M = 0;  // 0 for deterministic curves

  bool operator==(const TimeSeriesRow&) const = default;
};

struct Series {
  std::vector<double> t, mean, sem;
  long M = 0;
};

struct TimeSeriesTable {
  std::string name;
  std::vector<TimeSeriesRow> rows;

  void validate() const {
    std::map<std::string, double> last;
    for (const auto& r : rows) {
      require(!r.observable_id.empty() && r.observable_id.find(',') == std::string::npos,
              "table " + name + ": observable ids must be non-empty and comma-free");
      require(r.sem >= 0.0, "table " + name + ": negative sem for " + r.observable_id);
      require(r.M >= 0, "table " + name + ": negative M");
      auto it = last.find(r.observable_id);
      if (it != last.end()) require(r.time_us >= it->second, "table " + name + ": time decreases within " + r.observable_id);
      last[r.observable_id] = r.time_us;
    }
  }

  std::vector<std::string> observables() const {
    std::vector<std::string> ids;
    for (const auto& r : rows)
      if (std::find(ids.begin(), ids.end(), r.observable_id) == ids.end()) ids.push_back(r.observable_id);
    return ids;
  }

  Series series(const std::string& id) const {
    Series s;
    for (const auto& r : rows)
      if (r.observable_id == id) {
        s.t.push_back(r.time_us);
        s.mean.push_back(r.mean);
        s.sem.push_back(r.sem);
        s.M = r.M;
      }
    require(!s.t.empty(), "table " + name + " has no observable '" + id + "'");
    return s;
  }

  /// Rows of one ensemble, observable-major.
  void append(const noise::EnsembleResult& e, const std::vector<std::string>& ids) {
    require(ids.size() == e.observables.size(), "append: id count differs from ensemble");
    for (std::size_t o = 0; o < ids.size(); ++o)
      for (std::size_t k = 0; k < e.times.size(); ++k)
        rows.push_back({e.times[k], ids[o], e.mean(Index(o), Index(k)), e.sem(Index(o), Index(k)), e.M});
  }

  void append(const std::string& id, const std::vector<double>& t, const std::vector<double>& values) {
    require(t.size() == values.size(), "append: size mismatch");
    for (std::size_t k = 0; k < t.size(); ++k) rows.push_back({t[k], id, values[k], 0.0, 0});
  }
};

inline void write_csv(std::ostream& os, const TimeSeriesTable& t) {
  t.validate();
  os << kTimeSeriesHeader << '\n';
  for (const auto& r : t.rows)
    os << format_double(r.time_us) << ',' << r.observable_id << ',' << format_double(r.mean) << ','
       << format_double(r.sem) << ',' << r.M << '\n';
}

inline std::string to_csv(const TimeSeriesTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

inline TimeSeriesTable read_time_series_csv(std::istream& is, std::string name = {}) {
  std::string line;
  if (!std::getline(is, line) || line != kTimeSeriesHeader) throw IoError("csv: expected header '" + std::string(kTimeSeriesHeader) + "'");
  TimeSeriesTable t;
  t.name = std::move(name);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 5) throw IoError("csv: expected 5 columns in '" + line + "'");
    t.rows.push_back({parse_double(c[0]), c[1], parse_double(c[2]), parse_double(c[3]), parse_long(c[4])});
  }
  t.validate();
  return t;
}

// ---------------------------------------------------------------------------

struct WalkRow {
  double time_us = 0.0;
  int site = 1;
  double mean_n = 0.0;

  bool operator==(const WalkRow&) const = default;
};

struct WalkTable {
  std::string name;
  int L = 0;
  std::vector<WalkRow> rows;

  /// n[k][j-1] at sample k.
  static WalkTable from_profiles(std::string name, const std::vector<double>& t, const std::vector<std::vector<double>>& n) {
    WalkTable w;
    w.name = std::move(name);
    w.L = n.empty() ? 0 : int(n.front().size());
    for (std::size_t k = 0; k < t.size(); ++k)
      for (int j = 1; j <= w.L; ++j) w.rows.push_back({t[k], j, n[k][std::size_t(j - 1)]});
    return w;
  }
};

inline std::string to_csv(const WalkTable& w) {
  std::ostringstream os;
  os << kWalkHeader << '\n';
  for (const auto& r : w.rows) os << format_double(r.time_us) << ',' << r.site << ',' << format_double(r.mean_n) << '\n';
  return os.str();
}

inline WalkTable read_walk_csv(std::istream& is, std::string name = {}) {
  std::string line;
  if (!std::getline(is, line) || line != kWalkHeader) throw IoError("csv: expected header '" + std::string(kWalkHeader) + "'");
  WalkTable w;
  w.name = std::move(name);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 3) throw IoError("csv: expected 3 columns in '" + line + "'");
    w.rows.push_back({parse_double(c[0]), int(parse_long(c[1])), parse_double(c[2])});
    w.L = std::max(w.L, w.rows.back().site);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Late-time value

struct LateTime {
  double value = 0.0;  // mean over the window
  double sem = 0.0;    // mean per-point sem over the window (conservative)
  double drift = 0.0;  // |least-squares slope| * window length
  double window_start = 0.0;
  long points = 0;
  bool stationary = false;
};

inline constexpr double kLateFraction = 0.1;
inline constexpr double kMaxDrift = 0.01;

/// Average over the final `fraction` of the run, with a linear-drift check.
inline LateTime late_time(const Series& s, double fraction = kLateFraction, double max_drift = kMaxDrift) {
  require(s.t.size() >= 2, "late_time: need at least two samples");
  require(fraction > 0.0 && fraction <= 1.0, "late_time: fraction must be in (0, 1]");
  const double t_end = s.t.back(), t0 = t_end - fraction * (t_end - s.t.front());
  LateTime out;
  out.window_start = t0;
  double st = 0.0, sy = 0.0, ss = 0.0;
  long n = 0;
  for (std::size_t k = 0; k < s.t.size(); ++k)
    if (s.t[k] >= t0 - 1e-12) {
      st += s.t[k];
      sy += s.mean[k];
      ss += s.sem[k];
      ++n;
    }
  require(n >= 2, "late_time: fewer than two samples in the window");
  const double tm = st / double(n), ym = sy / double(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < s.t.size(); ++k)
    if (s.t[k] >= t0 - 1e-12) {
      sxy += (s.t[k] - tm) * (s.mean[k] - ym);
      sxx += (s.t[k] - tm) * (s.t[k] - tm);
    }
  out.value = ym;
  out.sem = ss / double(n);
  out.drift = sxx > 0.0 ? std::abs(sxy / sxx) * (t_end - t0) : 0.0;
  out.points = n;
  out.stationary = out.drift <= max_drift;
  return out;
}

/// Mean at t, linear between samples.
inline double value_at(const Series& s, double t) {
  require(!s.t.empty(), "value_at: empty series");
  require(t >= s.t.front() - 1e-12 && t <= s.t.back() + 1e-12, "value_at: time outside the series");
  const auto it = std::lower_bound(s.t.begin(), s.t.end(), t);
  if (it == s.t.begin()) return s.mean.front();
  if (it == s.t.end()) return s.mean.back();
  const std::size_t k = std::size_t(it - s.t.begin());
  const double w = (t - s.t[k - 1]) / (s.t[k] - s.t[k - 1]);
  return (1.0 - w) * s.mean[k - 1] + w * s.mean[k];
}

}  // namespace qsteady::xprun
