#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nqkr/errors.hpp"
#include "nqkr/fit.hpp"
#include "nqkr/observables.hpp"
#include "nqkr/parallel.hpp"
#include "nqkr/propagator.hpp"

namespace nqkr {

/// Scale-free summary of an OTOC series.
struct PhaseFeatures {
  /// Relative growth across [T/2, T]: fitted slope * window length / window mean.
  double late_slope_normalized = 0.0;
  /// mean C over [3T/4, T] divided by mean C over [T/4, T/2]; 1 when saturated, 7/3 for C ~ t.
  double doubling_ratio = 1.0;
  /// 1 - r^2 of a straight line over [T/2, T]: share of the late variance a trend
  /// cannot explain. 1 for a constant or patternless series, 0 for a clean ramp.
  double saturation_r2 = 1.0;
};

inline constexpr int kMinFeatureKicks = 200;
inline constexpr double kMaxDoublingRatio = 1e6;

namespace detail {

inline double window_mean(const std::vector<int>& t, const std::vector<double>& c, int lo, int hi) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= lo && t[i] <= hi) {
      s += c[i];
      ++n;
    }
  return n > 0 ? s / static_cast<double>(n) : 0.0;
}

}  // namespace detail

/// Features of a raw C(t) sequence with times t (inclusive windows on t).
inline PhaseFeatures extract_features(const std::vector<int>& t, const std::vector<double>& c) {
  if (t.size() != c.size()) throw ConfigError("extract_features: t and C differ in length");
  if (t.empty() || t.back() < kMinFeatureKicks)
    throw ConfigError("extract_features: series must cover at least " + std::to_string(kMinFeatureKicks) +
                      " kicks");
  const int T = t.back();
  if (std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; })) return {0.0, 1.0, 1.0};

  PhaseFeatures f;
  const double early = detail::window_mean(t, c, T / 4, T / 2);
  const double late = detail::window_mean(t, c, 3 * T / 4, T);
  if (early > 0.0)
    f.doubling_ratio = std::min(late / early, kMaxDoublingRatio);
  else
    f.doubling_ratio = late > 0.0 ? kMaxDoublingRatio : 1.0;

  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= T / 2 && t[i] <= T) {
      x.push_back(static_cast<double>(t[i]));
      y.push_back(c[i]);
    }
  const LinearFit line = fit_line(x, y);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  const double span = x.back() - x.front();
  f.late_slope_normalized = mean > 0.0 ? line.slope * span / mean : 0.0;

  double syy = 0.0;
  for (double v : y) syy += (v - mean) * (v - mean);
  f.saturation_r2 = syy > 0.0 ? 1.0 - line.r_squared : 1.0;
  return f;
}

inline PhaseFeatures extract_features(const OtocSeries& s) {
  std::vector<int> t;
  std::vector<double> c;
  t.reserve(s.size());
  c.reserve(s.size());
  for (const auto& r : s.records) {
    t.push_back(r.t);
    c.push_back(r.c_approx);
  }
  return extract_features(t, c);
}

/// Probability rho that a series belongs to the chaotic-scrambling phase.
///
/// Logistic of z = 10 (R - 1.5) + 1.5 (ns - 1/3) - 1.5 (sat - 1/2), with
/// ns clipped to [-1, 1] and sat to [0, 1]. The R term dominates: R <= 1
/// gives rho < 0.04 and R >= 2 gives rho > 0.9 whatever the other two are.
inline double classify(const PhaseFeatures& f) {
  const double ns = std::clamp(f.late_slope_normalized, -1.0, 1.0);
  const double sat = std::clamp(f.saturation_r2, 0.0, 1.0);
  const double r = std::clamp(f.doubling_ratio, 0.0, kMaxDoublingRatio);
  const double z = 10.0 * (r - 1.5) + 1.5 * (ns - 1.0 / 3.0) - 1.5 * (sat - 0.5);
  return 1.0 / (1.0 + std::exp(-z));
}

// ---------------------------------------------------------------------------
// Phase diagrams
// ---------------------------------------------------------------------------

enum class PhasePlane { EtaK, LambdaK };

inline const char* to_string(PhasePlane p) { return p == PhasePlane::EtaK ? "eta-K" : "lambda-K"; }

struct PhaseAxis {
  std::string name;
  std::vector<double> values;
};

/// `count` points from start to stop, both included.
inline std::vector<double> linspace(double start, double stop, int count) {
  if (count < 1) throw ConfigError("range needs at least one point");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    v[static_cast<std::size_t>(i)] = count == 1 ? start : start + (stop - start) * i / (count - 1);
  return v;
}

struct PhasePoint {
  double axis1 = 0.0;
  double axis2 = 0.0;
  double rho = 0.0;
  PhaseFeatures features;
};

/// Where rho crosses 0.5 along axis1 for one axis2 column.
struct BoundaryPoint {
  enum class Kind { Crossing, AboveRange, BelowRange };
  double axis2 = 0.0;
  Kind kind = Kind::Crossing;
  double axis1 = 0.0;  // valid for Crossing
};

/// points are row-major: points[i1 * axis2.size() + i2].
struct PhaseDiagram {
  PhasePlane plane = PhasePlane::EtaK;
  PhaseAxis axis1;
  PhaseAxis axis2;
  std::vector<PhasePoint> points;
  std::vector<BoundaryPoint> boundary;

  const PhasePoint& at(std::size_t i1, std::size_t i2) const { return points[i1 * axis2.values.size() + i2]; }
};

/// For each axis2 column, the rho = 0.5 level set along axis1 by linear interpolation.
///
/// In the eta-K plane rho grows with eta, in the lambda-K plane it falls with
/// lambda. A column with no crossing is reported as lying above (still frozen at
/// the top of the axis1 range in eta-K, still scrambling in lambda-K) or below
/// the range.
inline std::vector<BoundaryPoint> phase_boundary(const PhaseDiagram& d) {
  const bool rising = d.plane == PhasePlane::EtaK;
  std::vector<BoundaryPoint> out;
  const std::size_t n1 = d.axis1.values.size();
  for (std::size_t i2 = 0; i2 < d.axis2.values.size(); ++i2) {
    BoundaryPoint b;
    b.axis2 = d.axis2.values[i2];
    auto scrambling = [&](std::size_t i1) { return d.at(i1, i2).rho >= 0.5; };
    const bool target_at_start = rising ? scrambling(0) : !scrambling(0);
    if (target_at_start) {
      b.kind = BoundaryPoint::Kind::BelowRange;
      out.push_back(b);
      continue;
    }
    b.kind = BoundaryPoint::Kind::AboveRange;
    for (std::size_t i1 = 0; i1 + 1 < n1; ++i1) {
      const double r0 = d.at(i1, i2).rho, r1 = d.at(i1 + 1, i2).rho;
      const bool hit = rising ? (r0 < 0.5 && r1 >= 0.5) : (r0 >= 0.5 && r1 < 0.5);
      if (!hit) continue;
      const double x0 = d.axis1.values[i1], x1 = d.axis1.values[i1 + 1];
      b.kind = BoundaryPoint::Kind::Crossing;
      b.axis1 = x0 + (0.5 - r0) * (x1 - x0) / (r1 - r0);
      break;
    }
    out.push_back(b);
  }
  return out;
}

struct PhaseDiagramRequest {
  PhasePlane plane = PhasePlane::EtaK;
  std::vector<double> axis1;  // eta or lambda
  std::vector<double> axis2;  // K
  SimConfig base{};
  int kicks = 1000;
  int jobs = 1;
  /// Called once per finished point (from worker threads, serialized).
  std::function<void(std::size_t done, std::size_t total)> progress;
};

inline SimConfig phase_point_config(const PhaseDiagramRequest& req, double a1, double a2) {
  SimConfig c = req.base;
  c.kicks = req.kicks;
  c.schedule.K = a2;
  if (req.plane == PhasePlane::EtaK)
    c.schedule.eta = a1;
  else
    c.schedule.lambda = a1;
  return c;
}

/// rho for one configuration.
inline PhasePoint evaluate_phase_point(const SimConfig& c) {
  OtocSeries series;
  evolve(c, otoc_recorder(series, c.epsilon_shift));
  PhasePoint p;
  p.features = extract_features(series);
  p.rho = classify(p.features);
  return p;
}

/// Runs every grid point on a pool of req.jobs workers. Results land in
/// pre-assigned slots, so the output does not depend on scheduling.
inline PhaseDiagram phase_diagram(const PhaseDiagramRequest& req) {
  if (req.axis1.size() < 2 || req.axis2.size() < 2) throw ConfigError("phase diagram grid must be at least 2x2");
  if (req.kicks < 500) throw ConfigError("phase diagram needs at least 500 kicks per point");

  PhaseDiagram d;
  d.plane = req.plane;
  d.axis1 = {req.plane == PhasePlane::EtaK ? "eta" : "lambda", req.axis1};
  d.axis2 = {"K", req.axis2};
  const std::size_t n2 = req.axis2.size();
  const std::size_t total = req.axis1.size() * n2;
  d.points.resize(total);

  std::size_t done = 0;
  std::mutex mu;
  parallel_for(total, req.jobs, [&](std::size_t k) {
    const double a1 = req.axis1[k / n2], a2 = req.axis2[k % n2];
    PhasePoint p = evaluate_phase_point(phase_point_config(req, a1, a2));
    p.axis1 = a1;
    p.axis2 = a2;
    d.points[k] = p;
    std::lock_guard lock(mu);
    ++done;
    if (req.progress) req.progress(done, total);
  });
  d.boundary = phase_boundary(d);
  return d;
}

}  // namespace nqkr
