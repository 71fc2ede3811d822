#include <gtest/gtest.h>

#include <random>

#include "nqkr/classifier.hpp"

using namespace nqkr;

namespace {

struct Series {
  std::vector<int> t;
  std::vector<double> c;
};

Series make(int T, auto&& f) {
  Series s;
  for (int t = 1; t <= T; ++t) {
    s.t.push_back(t);
    s.c.push_back(f(t));
  }
  return s;
}

PhaseFeatures features(const Series& s) { return extract_features(s.t, s.c); }

SimConfig production(double K, double lambda, double eta = 0.75) {
  SimConfig c;
  c.schedule.K = K;
  c.schedule.lambda = lambda;
  c.schedule.eta = eta;
  c.kicks = 1000;
  return c;
}

}  // namespace

TEST(Features, ConstantSeries) {
  const auto f = features(make(1000, [](int) { return 4e-9; }));
  EXPECT_EQ(f.doubling_ratio, 1.0);
  EXPECT_EQ(f.late_slope_normalized, 0.0);
  EXPECT_EQ(f.saturation_r2, 1.0);
}

TEST(Features, LinearSeriesRatioIsSevenThirds) {
  const auto f = features(make(1000, [](int t) { return 5e-9 * t; }));
  EXPECT_NEAR(f.doubling_ratio, 7.0 / 3.0, 1e-12);
  EXPECT_NEAR(f.saturation_r2, 0.0, 1e-12);
  EXPECT_NEAR(f.late_slope_normalized, 500.0 / 750.0, 1e-12);
}

TEST(Features, AllZeroConvention) {
  const auto f = features(make(300, [](int) { return 0.0; }));
  EXPECT_EQ(f.late_slope_normalized, 0.0);
  EXPECT_EQ(f.doubling_ratio, 1.0);
  EXPECT_EQ(f.saturation_r2, 1.0);
}

TEST(Features, ShortSeriesRejected) {
  EXPECT_THROW(features(make(199, [](int t) { return 1.0 * t; })), ConfigError);
  EXPECT_THROW(extract_features({1, 2}, {1.0}), ConfigError);
}

TEST(Features, ScaleInvariant) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  const auto s = make(1000, [&](int t) { return 1e-9 * std::sqrt(t) * u(rng); });
  auto big = s;
  for (auto& v : big.c) v *= 1e6;
  const auto a = features(s), b = features(big);
  EXPECT_LT(std::abs(a.doubling_ratio - b.doubling_ratio) / a.doubling_ratio, 1e-12);
  EXPECT_LT(std::abs(a.late_slope_normalized - b.late_slope_normalized) / std::abs(a.late_slope_normalized), 1e-12);
  EXPECT_LT(std::abs(a.saturation_r2 - b.saturation_r2), 1e-12);
}

TEST(Classify, DeepFreezingAndScrambling) {
  EXPECT_LT(classify(features(make(1000, [](int) { return 4e-9; }))), 0.05);
  EXPECT_GT(classify(features(make(1000, [](int t) { return 5e-9 * t; }))), 0.95);
}

TEST(Classify, CalibrationBounds) {
  for (double ns : {-5.0, -1.0, 0.0, 0.5, 1.0, 5.0})
    for (double sat : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
      EXPECT_LT(classify({ns, 1.0, sat}), 0.1);
      EXPECT_GT(classify({ns, 2.0, sat}), 0.9);
    }
}

TEST(Classify, MonotoneInEachFeature) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ns(-2, 2), r(0, 4), sat(-0.5, 1.5), step(0, 0.5);
  for (int i = 0; i < 2000; ++i) {
    const PhaseFeatures f{ns(rng), r(rng), sat(rng)};
    const double rho = classify(f);
    EXPECT_GE(rho, 0.0);
    EXPECT_LE(rho, 1.0);
    auto g = f;
    g.doubling_ratio += step(rng);
    EXPECT_GE(classify(g), rho);
    g = f;
    g.late_slope_normalized += step(rng);
    EXPECT_GE(classify(g), rho);
    g = f;
    g.saturation_r2 += step(rng);
    EXPECT_LE(classify(g), rho);
  }
}

TEST(Production, ScramblingRunHasLargeRatio) {
  const auto p = evaluate_phase_point(production(10, 0));
  EXPECT_GT(p.features.doubling_ratio, 1.8);
  EXPECT_GT(p.rho, 0.9);
}

TEST(Production, WeakKickSaturates) {
  EXPECT_LT(evaluate_phase_point(production(1, 0)).features.doubling_ratio, 1.2);
}

TEST(Production, WeakKickWithoutModulationSaturates) {
  EXPECT_LT(evaluate_phase_point(production(1, 0, 0.0)).features.doubling_ratio, 1.2);
}

TEST(Production, StrongGainFreezes) {
  const auto p = evaluate_phase_point(production(10, 5));
  EXPECT_LT(p.features.doubling_ratio, 1.2);
  EXPECT_LT(p.rho, 0.1);
}

TEST(Boundary, RisingColumnInterpolates) {
  PhaseDiagram d;
  d.plane = PhasePlane::EtaK;
  d.axis1 = {"eta", {0.0, 0.5, 1.0}};
  d.axis2 = {"K", {1.0, 5.0, 10.0}};
  const double rho[3][3] = {{0.1, 0.1, 0.9}, {0.3, 0.7, 0.9}, {0.4, 0.9, 0.9}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) d.points.push_back({d.axis1.values[i], d.axis2.values[j], rho[i][j], {}});
  const auto b = phase_boundary(d);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].kind, BoundaryPoint::Kind::AboveRange);
  EXPECT_EQ(b[1].kind, BoundaryPoint::Kind::Crossing);
  EXPECT_NEAR(b[1].axis1, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(b[2].kind, BoundaryPoint::Kind::BelowRange);
}

TEST(Boundary, FallingColumnForGain) {
  PhaseDiagram d;
  d.plane = PhasePlane::LambdaK;
  d.axis1 = {"lambda", {0.0, 1.0, 2.0}};
  d.axis2 = {"K", {5.0, 10.0}};
  const double rho[3][2] = {{0.9, 0.9}, {0.6, 0.9}, {0.2, 0.8}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) d.points.push_back({d.axis1.values[i], d.axis2.values[j], rho[i][j], {}});
  const auto b = phase_boundary(d);
  EXPECT_EQ(b[0].kind, BoundaryPoint::Kind::Crossing);
  EXPECT_NEAR(b[0].axis1, 1.25, 1e-15);
  EXPECT_EQ(b[1].kind, BoundaryPoint::Kind::AboveRange);
}

TEST(Linspace, InclusiveEndpoints) {
  const auto v = linspace(0.0, 1.0, 11);
  ASSERT_EQ(v.size(), 11u);
  EXPECT_EQ(v.front(), 0.0);
  EXPECT_EQ(v.back(), 1.0);
  EXPECT_EQ(linspace(3.0, 9.0, 1), std::vector<double>{3.0});
  EXPECT_THROW(linspace(0, 1, 0), ConfigError);
}

TEST(Diagram, RejectsSmallRequests) {
  PhaseDiagramRequest r;
  r.axis1 = {0.1};
  r.axis2 = {1, 10};
  EXPECT_THROW(phase_diagram(r), ConfigError);
  r.axis1 = {0.1, 1};
  r.kicks = 499;
  EXPECT_THROW(phase_diagram(r), ConfigError);
}

TEST(Diagram, CornersBracketTheBoundary) {
  PhaseDiagramRequest r;
  r.axis1 = {0.1, 1.0};
  r.axis2 = {1.0, 10.0};
  r.jobs = default_jobs();
  const auto d = phase_diagram(r);
  ASSERT_EQ(d.points.size(), 4u);
  EXPECT_EQ(d.at(0, 1).axis1, 0.1);
  EXPECT_EQ(d.at(0, 1).axis2, 10.0);
  EXPECT_LT(d.at(0, 0).rho, 0.5);
  EXPECT_GT(d.at(1, 1).rho, 0.5);
}

TEST(Diagram, IndependentOfWorkerCount) {
  PhaseDiagramRequest r;
  r.axis1 = {0.0, 0.5, 1.0};
  r.axis2 = {3.0, 10.0};
  r.kicks = 500;
  r.base.lattice = MomentumLattice(1024, 2.89);
  std::size_t calls = 0;
  r.progress = [&](std::size_t, std::size_t) { ++calls; };
  r.jobs = 1;
  const auto a = phase_diagram(r);
  EXPECT_EQ(calls, 6u);
  r.jobs = 4;
  const auto b = phase_diagram(r);
  for (std::size_t k = 0; k < a.points.size(); ++k) EXPECT_EQ(a.points[k].rho, b.points[k].rho);
}

TEST(Diagram, GainColumnFreezes) {
  PhaseDiagramRequest r;
  r.plane = PhasePlane::LambdaK;
  r.axis1 = {0.0, 5.0};
  r.axis2 = {7.0, 10.0};
  r.jobs = default_jobs();
  const auto d = phase_diagram(r);
  EXPECT_GT(d.at(0, 1).rho, 0.9);
  EXPECT_LT(d.at(1, 1).rho, 0.1);
  EXPECT_EQ(d.boundary[1].kind, BoundaryPoint::Kind::Crossing);
}
