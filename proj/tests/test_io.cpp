#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "nqkr/analysis.hpp"
#include "nqkr/io.hpp"

using namespace nqkr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nqkr_io_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool within_15_digits(double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST(Format, FifteenSignificantDigits) {
  EXPECT_EQ(fmt15(0.1), "0.1");
  EXPECT_EQ(fmt15(1.0 / 3.0), "0.333333333333333");
  EXPECT_EQ(fmt15(5e-9), "5e-09");
  EXPECT_EQ(fmt15(-2.0), "-2");
}

TEST(SeriesCsv, RoundTrip) {
  SimConfig c;
  c.lattice = MomentumLattice(512, 2.89);
  c.schedule.K = 10;
  c.schedule.lambda = 1;
  c.kicks = 60;
  const auto run = run_otoc(c);
  const auto dir = scratch("series");
  write_series_csv(dir / "s.csv", run.series);
  const auto back = read_series_csv(dir / "s.csv");
  ASSERT_EQ(back.size(), run.series.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const auto &a = run.series.records[i], &b = back.records[i];
    EXPECT_EQ(a.t, b.t);
    EXPECT_TRUE(within_15_digits(a.c_exact, b.c_exact));
    EXPECT_TRUE(within_15_digits(a.c_approx, b.c_approx));
    EXPECT_TRUE(within_15_digits(a.log_norm, b.log_norm));
    EXPECT_TRUE(within_15_digits(a.mean_p2, b.mean_p2));
    EXPECT_LE(std::abs(a.mean_p - b.mean_p), 1e-14 * std::sqrt(a.mean_p2));
  }
  fs::remove_all(dir);
}

TEST(SeriesCsv, RejectsForeignFiles) {
  const auto dir = scratch("bad");
  std::ofstream(dir / "x.csv") << "a,b\n1,2\n";
  EXPECT_THROW(read_series_csv(dir / "x.csv"), Error);
  std::ofstream(dir / "y.csv") << "t,c_exact,c_approx,log_norm,mean_p,mean_p2\n1,2\n";
  EXPECT_THROW(read_series_csv(dir / "y.csv"), Error);
  EXPECT_THROW(read_series_csv(dir / "missing.csv"), Error);
  fs::remove_all(dir);
}

TEST(SpectrumCsv, HeaderAndRows) {
  SimConfig c;
  c.schedule.K = 10;
  c.schedule.lambda = 2;
  const auto s = quasi_spectrum(build_floquet_matrix(c, 3, 16));
  const auto dir = scratch("spec");
  write_spectrum_csv(dir / "spec.csv", s);
  std::ifstream in(dir / "spec.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "eps_r,eps_i,residual");
  std::size_t rows = 0;
  double er, ei, res;
  while (std::getline(in, line)) {
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &er, &ei, &res), 3);
    EXPECT_TRUE(within_15_digits(ei, s.eps_i(rows)));
    ++rows;
  }
  EXPECT_EQ(rows, 16u);
  fs::remove_all(dir);
}

TEST(PhaseFiles, CsvMatrixAndJson) {
  PhaseDiagram d;
  d.axis1 = {"eta", {0.0, 1.0}};
  d.axis2 = {"K", {1.0, 5.0, 10.0}};
  for (double a : d.axis1.values)
    for (double k : d.axis2.values) d.points.push_back({a, k, a * k / 10.0, {}});
  d.boundary = phase_boundary(d);
  const auto dir = scratch("phase");
  write_phase_csv(dir / "p.csv", d);
  write_phase_matrix(dir / "p.dat", d);
  std::ifstream csv(dir / "p.csv");
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "axis1,axis2,rho");
  std::getline(csv, line);
  EXPECT_EQ(line, "0,1,0");
  std::ifstream mat(dir / "p.dat");
  std::getline(mat, line);
  EXPECT_EQ(line, "3 1 5 10");
  std::getline(mat, line);
  EXPECT_EQ(line, "0 0 0 0");
  std::getline(mat, line);
  EXPECT_EQ(line, "1 0.1 0.5 1");

  const auto j = to_json(d);
  EXPECT_EQ(j["points"].size(), 6u);
  EXPECT_EQ(j["boundary"].size(), 3u);
  fs::remove_all(dir);
}

TEST(Json, ConfigCarriesEveryField) {
  SimConfig c;
  c.schedule.K = 7;
  const auto j = to_json(c);
  for (const char* key : {"lattice", "hbar", "K", "lambda", "eta", "omega1", "omega2", "kicks",
                          "kick_phase_divisor", "epsilon_shift", "first_kick_time", "angle_origin"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["K"], 7.0);
}

TEST(Json, FitsSerialize) {
  ProfileFit f{ProfileKind::Gaussian, 200.0, 0.99, -1.0, 5.78, 100.0, 40};
  const auto j = to_json(f);
  EXPECT_EQ(j["kind"], "gaussian");
  EXPECT_EQ(j["xi_or_sigma"], 200.0);
  EXPECT_EQ(j["fit_window"][1], 100.0);
  const auto p = nlohmann::json::parse(j.dump());
  EXPECT_EQ(p, j);
}
