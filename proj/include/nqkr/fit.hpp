#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "nqkr/errors.hpp"

namespace nqkr {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Coefficient of determination. 1 when the data are fitted exactly
  /// (including the zero-variance case).
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope * x + intercept, centred for stability.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw FitError("fit_line: x and y differ in length");
  if (x.size() < 2) throw FitError("fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw FitError("fit_line: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss_res += r * r;
  }
  if (syy > 0.0)
    f.r_squared = std::max(0.0, 1.0 - ss_res / syy);
  else
    f.r_squared = 1.0;
  return f;
}

}  // namespace nqkr
