#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "qsteady/xprun/run.hpp"

using namespace qsteady;
using namespace qsteady::xprun;

namespace {

fs::path scratch_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  const fs::path p = fs::temp_directory_path() / ("qsteady_" + tag + "_" + std::to_string(rng()));
  fs::create_directories(p);
  return p;
}

struct DirGuard {
  fs::path p;
  ~DirGuard() {
    std::error_code ec;
    fs::remove_all(p, ec);
  }
};

TimeSeriesTable sample_table() {
  TimeSeriesTable t{"demo", {}};
  t.append("a", {0.0, 0.1, 0.2}, {1.0, 1.0 / 3.0, -0.0});
  t.rows.push_back({0.0, "b", 0.125, 0.01, 10});
  t.rows.push_back({0.5, "b", -2.5e-17, 0.02, 10});
  return t;
}

}  // namespace

TEST(Csv, FormatIsShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(g);
    EXPECT_EQ(parse_double(format_double(x)), x);
  }
  EXPECT_THROW(parse_double("1.0x"), Error);
}

TEST(Csv, TimeSeriesRoundTripIsByteStable) {
  const auto t = sample_table();
  const std::string a = to_csv(t);
  std::istringstream is(a);
  const auto back = read_time_series_csv(is, "demo");
  EXPECT_EQ(to_csv(back), a);
  EXPECT_EQ(back.observables(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(back.series("b").M, 10);
  EXPECT_EQ(back.series("a").mean[1], 1.0 / 3.0);
  EXPECT_EQ(a.substr(0, a.find('\n')), "time_us,observable_id,mean,sem,M");
}

TEST(Csv, RejectsMalformedInput) {
  std::istringstream bad_header("t,id,mean,sem,M\n0,a,1,0,0\n");
  EXPECT_THROW(read_time_series_csv(bad_header), IoError);
  std::istringstream short_row(std::string(kTimeSeriesHeader) + "\n0,a,1,0\n");
  EXPECT_THROW(read_time_series_csv(short_row), IoError);
  std::istringstream backwards(std::string(kTimeSeriesHeader) + "\n1,a,1,0,0\n0.5,a,1,0,0\n");
  EXPECT_THROW(read_time_series_csv(backwards), Error);
  TimeSeriesTable neg{"x", {{0.0, "a", 0.0, -1.0, 1}}};
  EXPECT_THROW(neg.validate(), Error);
  TimeSeriesTable comma{"x", {{0.0, "a,b", 0.0, 0.0, 1}}};
  EXPECT_THROW(to_csv(comma), Error);
}

TEST(Csv, WalkRoundTrip) {
  const auto w = WalkTable::from_profiles("w", {0.0, 0.005}, {{0, 1, 0}, {0.25, 0.5, 0.25}});
  const std::string a = to_csv(w);
  std::istringstream is(a);
  const auto back = read_walk_csv(is, "w");
  EXPECT_EQ(back.L, 3);
  EXPECT_EQ(back.rows, w.rows);
  EXPECT_EQ(to_csv(back), a);
}

TEST(LateTimeValue, ConstantSeriesIsStationary) {
  Series s;
  for (int k = 0; k <= 100; ++k) {
    s.t.push_back(0.1 * k);
    s.mean.push_back(k < 50 ? 1.0 : 0.2);
    s.sem.push_back(0.01);
  }
  const auto l = late_time(s);
  EXPECT_NEAR(l.value, 0.2, 1e-15);
  EXPECT_NEAR(l.drift, 0.0, 1e-12);
  EXPECT_NEAR(l.window_start, 9.0, 1e-12);
  EXPECT_EQ(l.points, 11);
  EXPECT_TRUE(l.stationary);
  EXPECT_NEAR(l.sem, 0.01, 1e-15);
}

TEST(LateTimeValue, LinearRampGivesExactDrift) {
  // y = 0.3 + 0.004 t over [0, 10]: window [9, 10], drift 0.004, mean at t = 9.5
  Series s;
  for (int k = 0; k <= 1000; ++k) {
    s.t.push_back(0.01 * k);
    s.mean.push_back(0.3 + 0.004 * s.t.back());
    s.sem.push_back(0.0);
  }
  auto l = late_time(s);
  EXPECT_NEAR(l.drift, 0.004, 1e-10);
  EXPECT_NEAR(l.value, 0.3 + 0.004 * 9.5, 1e-10);
  EXPECT_TRUE(l.stationary);
  for (auto& y : s.mean) y *= 5.0;  // slope 0.02 over the window
  l = late_time(s);
  EXPECT_NEAR(l.drift, 0.02, 1e-10);
  EXPECT_FALSE(l.stationary);
}

TEST(LateTimeValue, InterpolationAndRangeChecks) {
  const Series s{{0.0, 1.0, 2.0}, {0.0, 1.0, 3.0}, {0, 0, 0}, 0};
  EXPECT_DOUBLE_EQ(value_at(s, 1.5), 2.0);
  EXPECT_DOUBLE_EQ(value_at(s, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(value_at(s, 2.0), 3.0);
  EXPECT_THROW(value_at(s, 2.5), Error);
  EXPECT_THROW(late_time(Series{{0.0}, {1.0}, {0.0}, 0}), Error);
}

TEST(Seeds, BlocksAreDeterministicAndDisjoint) {
  SeedBook a(7, json::object()), b(7, json::object());
  const auto a0 = a.take("x", 5), a1 = a.take("y", 5);
  EXPECT_EQ(a0, b.take("x", 5));
  EXPECT_EQ(a1, b.take("y", 5));
  for (auto s : a0) EXPECT_EQ(std::count(a1.begin(), a1.end(), s), 0);
  EXPECT_EQ(a.used().at("y").get<std::vector<std::uint64_t>>(), a1);
}

TEST(Seeds, ExplicitListsWin) {
  SeedBook b(7, json{{"y", {11, 12}}});
  b.take("x", 3);
  EXPECT_EQ(b.take("y", 5), (std::vector<std::uint64_t>{11, 12}));
  SeedBook empty(7, json{{"x", json::array()}});
  EXPECT_THROW(empty.take("x", 2), Error);
}

TEST(Manifest, RefusesOverwriteWithoutForce) {
  DirGuard g{scratch_dir("ow")};
  RunManifest m;
  m.config = {{"scenario", "single_qubit"}};
  export_outputs({{"a.csv", "1\n"}}, m, g.p, false);
  RunManifest m2 = m;
  EXPECT_THROW(export_outputs({{"a.csv", "2\n"}}, m2, g.p, false), IoError);
  EXPECT_EQ(read_file(g.p / "a.csv"), "1\n");
  export_outputs({{"a.csv", "2\n"}}, m2, g.p, true);
  EXPECT_EQ(read_file(g.p / "a.csv"), "2\n");
}

TEST(Manifest, FlippedByteIsDetected) {
  DirGuard g{scratch_dir("flip")};
  RunManifest m;
  m.config = {{"scenario", "single_qubit"}};
  m.seeds = {{"c", {1, 2}}};
  export_outputs({{"a.csv", "time_us\n0.5\n"}, {"b.json", "{}\n"}}, m, g.p, false);
  const auto loaded = RunManifest::load(g.p / kManifestName);
  EXPECT_EQ(loaded.hashes, m.hashes);
  EXPECT_EQ(loaded.seeds, m.seeds);
  EXPECT_TRUE(verify_outputs(loaded, g.p).empty());

  std::string bytes = read_file(g.p / "a.csv");
  bytes[9] ^= 0x01;
  write_file(g.p / "a.csv", bytes);
  auto bad = verify_outputs(loaded, g.p);
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(bad[0].file, "a.csv");

  fs::remove(g.p / "b.json");
  bad = verify_outputs(loaded, g.p);
  ASSERT_EQ(bad.size(), 2u);
  EXPECT_TRUE(bad[1].actual.empty());
}

TEST(Manifest, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Config, DefaultsAndValidation) {
  const auto c = parse_config({{"scenario", "single_qubit"}});
  EXPECT_DOUBLE_EQ(c.dt_section, 0.0075);
  EXPECT_EQ(c.M, 100);
  EXPECT_DOUBLE_EQ(c.duration, 2.5);
  EXPECT_EQ(make_grid(c, c.duration).n_steps, 1000);

  EXPECT_THROW(parse_config({{"scenario", "nope"}}), InvalidArgument);
  EXPECT_THROW(parse_config({{"M", 3}}), InvalidArgument);
  EXPECT_THROW(parse_config(json::array()), InvalidArgument);
  EXPECT_THROW(parse_config({{"scenario", "single_qubit"}, {"M", 0}}), Error);
  // 1.001 us is not a multiple of the 2.5 ns step
  EXPECT_THROW(parse_config({{"scenario", "single_qubit"}, {"duration_us", 1.001}}), InvalidArgument);
  EXPECT_THROW(parse_config({{"scenario", "five_chain_phase_sweep"}, {"sample_dt_us", 0.0033}}), InvalidArgument);
  EXPECT_THROW(parse_config({{"scenario", "five_chain_phase_sweep"}, {"chain", {{"L", 7}, {"J_over_2pi_MHz", 11}}}}),
               Error);
  EXPECT_THROW(parse_config({{"scenario", "nine_chain"}, {"variants", {"ideal"}},
                             {"variant_overrides", {{"decoherent", {{"M", 3}}}}}}),
               Error);
  EXPECT_THROW(parse_config({{"scenario", "nine_chain"}, {"variants", {"noisy"}}}), Error);
  EXPECT_THROW(parse_config({{"scenario", "quantum_walk"}, {"phases_rad", {0.5}}}), Error);
}

TEST(Config, FileReferencesResolveRelativeToConfig) {
  DirGuard g{scratch_dir("cfg")};
  fs::create_directories(g.p / "sub");
  write_file(g.p / "sub" / "chain.json", R"({"L": 5, "J_over_2pi_MHz": 11})");
  write_file(g.p / "run.json", R"({"scenario": "five_chain_phase_sweep", "chain_file": "sub/chain.json"})");
  const auto c = load_config(g.p / "run.json");
  EXPECT_EQ(chain_of(c).L, 5);
  EXPECT_FALSE(c.snapshot.contains("chain_file"));

  write_file(g.p / "missing.json", R"({"scenario": "five_chain_phase_sweep", "chain_file": "nope.json"})");
  EXPECT_THROW(load_config(g.p / "missing.json"), InvalidArgument);
  EXPECT_THROW(load_config(g.p / "absent.json"), InvalidArgument);
}

// Small configs; the full ones run in the acceptance binary.
TEST(Determinism, WorkerCountDoesNotChangeBytes) {
  const auto c = parse_config({{"scenario", "nine_chain"},
                               {"chain", {{"L", 3}, {"J_over_2pi_MHz", 11}}},
                               {"variants", {"decoherent"}},
                               {"initial_states", {"phi0", "psipi"}},
                               {"rerun_check", false},
                               {"M", 6},
                               {"duration_us", 0.25},
                               {"sample_dt_us", 0.025}});
  DirGuard a{scratch_dir("w1")}, b{scratch_dir("w3")};
  const auto e1 = execute(c, {1, json::object()}, a.p, true);
  const auto e3 = execute(c, {3, json::object()}, b.p, true);
  EXPECT_EQ(e1.manifest.hashes, e3.manifest.hashes);
  EXPECT_EQ(e1.manifest.seeds, e3.manifest.seeds);

  DirGuard r{scratch_dir("rr")};
  const auto rr = rerun_from_manifest(RunManifest::load(a.p / kManifestName), r.p, 2, false);
  EXPECT_TRUE(rr.identical());
}

TEST(Determinism, SeedChangeChangesBytes) {
  json j{{"scenario", "single_qubit"}, {"M", 4}, {"duration_us", 0.25}, {"n_samples", 10}};
  const auto c1 = parse_config(j);
  j["seeds"] = {{"base", 2}};
  const auto c2 = parse_config(j);
  const auto o1 = run_scenario(c1), o2 = run_scenario(c2);
  EXPECT_NE(to_csv(o1.table("single_qubit_sse_numerical")), to_csv(o2.table("single_qubit_sse_numerical")));
  EXPECT_EQ(to_csv(o1.table("single_qubit_lme")), to_csv(o2.table("single_qubit_lme")));
}

TEST(Scenarios, QuantumWalkPiIsMirrorSymmetric) {
  const auto c = parse_config({{"scenario", "quantum_walk"}, {"duration_us", 0.2}});
  const auto out = run_scenario(c);
  EXPECT_TRUE(out.ok());
  EXPECT_LE(out.check("phi_pi:max_center_density").value, 1e-12);
  ASSERT_EQ(out.walks.size(), 2u);
  // total excitation number is conserved
  const auto& w = out.walks[0];
  double first = 0.0;
  for (const auto& r : w.rows)
    if (r.time_us == 0.0) first += r.mean_n;
  double last = 0.0;
  for (const auto& r : w.rows)
    if (r.time_us == w.rows.back().time_us) last += r.mean_n;
  EXPECT_NEAR(first, last, 1e-10);
}

TEST(Scenarios, SymmetryCheckPassesOnThreeSites) {
  const auto out = run_scenario(parse_config({{"scenario", "symmetry_check"}, {"L_values", {3}}}));
  EXPECT_TRUE(out.ok());
}
