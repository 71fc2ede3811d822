#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "nqkr/errors.hpp"
#include "nqkr/fit.hpp"
#include "nqkr/lattice.hpp"
#include "nqkr/propagator.hpp"

namespace nqkr {

// ---------------------------------------------------------------------------
// Rescaled OTOC
//
// With A = exp(-i eps p) and B = |psi0><psi0| the rescaled correlator is
//   C(t) = 1 - |<psi(t)| e^{-i eps p} |psi(t)>|^2 / N(t)^2.
// Dividing by N^2 is the same as evaluating the overlap on the unit-normalized
// state, so C can be taken directly from the renormalized amplitudes the
// propagator keeps; log_norm never enters.
// ---------------------------------------------------------------------------

/// 1 - |<e^{-i eps p}>|^2 on the normalized state.
///
/// Written as 2a - a^2 - b^2 with a = <2 sin^2(eps p / 2)> and b = <sin(eps p)>
/// so that C ~ 1e-9 is not lost to cancellation in 1 - |O|^2.
inline double otoc_exact(const WaveFunction& psi, double epsilon_shift) {
  const double w = detail::checked_weight(psi.amps);
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < psi.amps.size(); ++i) {
    const double x = epsilon_shift * psi.lattice.momentum_at(i);
    const double prob = std::norm(psi.amps[i]);
    const double h = std::sin(0.5 * x);
    a += 2.0 * h * h * prob;
    b += std::sin(x) * prob;
  }
  a /= w;
  b /= w;
  return std::clamp(2.0 * a - a * a - b * b, 0.0, 1.0);
}

/// Small-eps form eps^2 (<p^2> - <p>^2).
inline double otoc_approx(const WaveFunction& psi, double epsilon_shift) {
  const double mp = expectation_p(psi);
  const double var = std::max(0.0, expectation_p2(psi) - mp * mp);
  return epsilon_shift * epsilon_shift * var;
}

struct OtocRecord {
  int t = 0;
  double c_exact = 0.0;
  double c_approx = 0.0;
  double log_norm = 0.0;  // ln N(t)
  double mean_p = 0.0;
  double mean_p2 = 0.0;
};

struct OtocSeries {
  std::vector<OtocRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  int last_t() const { return records.empty() ? 0 : records.back().t; }

  void push(const OtocRecord& r) {
    if (!records.empty() && r.t <= records.back().t) throw ConfigError("OTOC records must be strictly ordered in t");
    records.push_back(r);
  }
};

inline OtocRecord measure(int t, const WaveFunction& psi, double epsilon_shift) {
  OtocRecord r;
  r.t = t;
  r.c_exact = otoc_exact(psi, epsilon_shift);
  r.mean_p = expectation_p(psi);
  r.mean_p2 = expectation_p2(psi);
  r.c_approx = epsilon_shift * epsilon_shift * std::max(0.0, r.mean_p2 - r.mean_p * r.mean_p);
  r.log_norm = psi.log_true_norm();
  return r;
}

/// Observer that appends one record per kick to `series`.
inline StepObserver otoc_recorder(OtocSeries& series, double epsilon_shift) {
  return [&series, epsilon_shift](int kicks, const WaveFunction& psi) {
    series.push(measure(kicks, psi, epsilon_shift));
  };
}

/// Inclusive range of kick times.
struct KickWindow {
  int first = 0;
  int last = 0;

  bool contains(int t) const noexcept { return t >= first && t <= last; }

  /// [T/2, T] for a series ending at T.
  static KickWindow second_half(const OtocSeries& s) {
    const int T = s.last_t();
    return {T / 2, T};
  }
};

namespace detail {

template <class Getter>
LinearFit fit_series(const OtocSeries& s, KickWindow w, Getter get, std::size_t min_points, const char* what) {
  std::vector<double> x, y;
  for (const auto& r : s.records)
    if (w.contains(r.t)) {
      x.push_back(static_cast<double>(r.t));
      y.push_back(get(r));
    }
  if (x.size() < min_points)
    throw FitError(std::string(what) + ": window [" + std::to_string(w.first) + ", " + std::to_string(w.last) +
                   "] holds " + std::to_string(x.size()) + " records, need " + std::to_string(min_points));
  return fit_line(x, y);
}

}  // namespace detail

struct NormGrowthFit {
  double mu = 0.0;
  double intercept = 0.0;
  KickWindow window;
  double r_squared = 0.0;
};

/// ln N(t) = mu t + c over the window.
inline NormGrowthFit fit_norm_growth(const OtocSeries& s, std::optional<KickWindow> window = std::nullopt) {
  const KickWindow w = window.value_or(KickWindow::second_half(s));
  const auto f = detail::fit_series(s, w, [](const OtocRecord& r) { return r.log_norm; }, 10, "fit_norm_growth");
  return {f.slope, f.intercept, w, f.r_squared};
}

/// D = dC/dt from a linear fit of c_approx over the window.
inline double scrambling_rate(const OtocSeries& s, std::optional<KickWindow> window = std::nullopt) {
  const KickWindow w = window.value_or(KickWindow::second_half(s));
  return detail::fit_series(s, w, [](const OtocRecord& r) { return r.c_approx; }, 10, "scrambling_rate").slope;
}

/// ln of the mean of N(t) over the window, via log-sum-exp (N overflows for strong gain).
inline double log_mean_norm(const OtocSeries& s, std::optional<KickWindow> window = std::nullopt) {
  const KickWindow w = window.value_or(KickWindow::second_half(s));
  double peak = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (const auto& r : s.records)
    if (w.contains(r.t)) {
      peak = std::max(peak, r.log_norm);
      ++count;
    }
  if (count == 0) throw FitError("log_mean_norm: empty window");
  double acc = 0.0;
  for (const auto& r : s.records)
    if (w.contains(r.t)) acc += std::exp(r.log_norm - peak);
  return peak + std::log(acc / static_cast<double>(count));
}

// ---------------------------------------------------------------------------
// Momentum profile fits
// ---------------------------------------------------------------------------

enum class ProfileKind { Exponential, Gaussian };

inline const char* to_string(ProfileKind k) { return k == ProfileKind::Exponential ? "exponential" : "gaussian"; }

/// Probabilities are clamped to this before taking logs.
inline constexpr double kLogFloor = 1e-30;

struct ProfileWindow {
  /// Points with |p| < core_sites * hbar are excluded (cusp at the origin).
  double core_sites = 2.0;
  double p_abs_max = std::numeric_limits<double>::infinity();
  /// Only points above this probability take part.
  double prob_floor = 1e-25;
};

struct ProfileFit {
  ProfileKind kind = ProfileKind::Exponential;
  /// xi for exp(-|p|/xi), sigma for exp(-p^2/sigma).
  double xi_or_sigma = 0.0;
  double r_squared = 0.0;
  double intercept = 0.0;
  /// |p| range actually covered by the fitted points.
  double p_abs_min = 0.0;
  double p_abs_max = 0.0;
  std::size_t points = 0;
};

namespace detail {

inline ProfileFit fit_profile(const MomentumDistribution& d, const ProfileWindow& w, ProfileKind kind) {
  std::vector<double> x, y;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const double floor = std::max(w.prob_floor, kLogFloor);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double ap = std::abs(d.p[i]);
    if (ap < w.core_sites * d.hbar - 1e-12 * d.hbar || ap > w.p_abs_max || !(d.prob[i] > floor)) continue;
    x.push_back(kind == ProfileKind::Exponential ? ap : ap * ap);
    y.push_back(std::log(std::max(d.prob[i], kLogFloor)));
    lo = std::min(lo, ap);
    hi = std::max(hi, ap);
  }
  if (x.size() < 10)
    throw FitError(std::string(to_string(kind)) + " profile fit: only " + std::to_string(x.size()) +
                   " points above the floor in the window, need 10");
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  const LinearFit f = fit_line(x, y);
  // A flat profile leaves only rounding noise in the slope.
  if (*ymax - *ymin <= 1e-12 * (1.0 + std::abs(*ymax)) || !(f.slope < 0.0)) throw FitError(std::string(to_string(kind)) + " profile fit: non-decaying profile");
  return {kind, -1.0 / f.slope, f.r_squared, f.intercept, lo, hi, x.size()};
}

}  // namespace detail

/// Least squares of ln(prob) against |p|; xi = -1/slope.
inline ProfileFit fit_exponential_profile(const MomentumDistribution& d, const ProfileWindow& w = {}) {
  return detail::fit_profile(d, w, ProfileKind::Exponential);
}

/// Least squares of ln(prob) against p^2; sigma = -1/slope.
inline ProfileFit fit_gaussian_profile(const MomentumDistribution& d, const ProfileWindow& w = {}) {
  return detail::fit_profile(d, w, ProfileKind::Gaussian);
}

struct ProfileComparison {
  std::optional<ProfileFit> exponential;
  std::optional<ProfileFit> gaussian;
  /// Model with the higher r^2 on the identical window.
  ProfileFit best;
};

inline ProfileComparison compare_profiles(const MomentumDistribution& d, const ProfileWindow& w = {}) {
  ProfileComparison c;
  std::string errors;
  try {
    c.exponential = fit_exponential_profile(d, w);
  } catch (const FitError& e) {
    errors += e.what();
  }
  try {
    c.gaussian = fit_gaussian_profile(d, w);
  } catch (const FitError& e) {
    errors += std::string(errors.empty() ? "" : "; ") + e.what();
  }
  if (!c.exponential && !c.gaussian) throw FitError(errors);
  if (c.exponential && c.gaussian)
    c.best = c.exponential->r_squared >= c.gaussian->r_squared ? *c.exponential : *c.gaussian;
  else
    c.best = c.exponential ? *c.exponential : *c.gaussian;
  return c;
}

}  // namespace nqkr
