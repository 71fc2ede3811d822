#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "nqkr/errors.hpp"

namespace nqkr {

using cplx = std::complex<double>;

/// Squared norms below this are treated as a collapsed state.
inline constexpr double kCollapseThreshold = 1e-300;

/// Truncated angular-momentum basis: sites n = -M/2 .. M/2-1 with p_n = n * hbar.
///
/// Storage index i maps to n = i - M/2. Every container in the library that
/// is indexed by momentum uses this order; only the propagator touches the
/// FFT layout.
class MomentumLattice {
 public:
  MomentumLattice(int size, double hbar) : size_(size), hbar_(hbar) {
    if (size < 2 || size % 2 != 0)
      throw ConfigError("lattice size must be an even integer >= 2, got " + std::to_string(size));
    if (!(hbar > 0.0) || !std::isfinite(hbar))
      throw ConfigError("hbar must be positive and finite");
  }

  int size() const noexcept { return size_; }
  double hbar() const noexcept { return hbar_; }

  int n_min() const noexcept { return -size_ / 2; }
  int n_max() const noexcept { return size_ / 2 - 1; }

  int index_of(int n) const noexcept { return n + size_ / 2; }
  int n_at(std::size_t index) const noexcept { return static_cast<int>(index) - size_ / 2; }
  double momentum_at(std::size_t index) const noexcept { return n_at(index) * hbar_; }

  bool operator==(const MomentumLattice&) const = default;

 private:
  int size_;
  double hbar_;
};

/// Rotor state on a momentum lattice.
///
/// The true squared norm is exp(log_norm) * sum |amps|^2. Non-Hermitian kicks
/// grow the norm exponentially, so the propagator keeps the amplitudes at unit
/// norm and moves the growth into log_norm.
struct WaveFunction {
  explicit WaveFunction(MomentumLattice l)
      : lattice(l), amps(static_cast<std::size_t>(l.size()), cplx{0.0, 0.0}) {}

  MomentumLattice lattice;
  std::vector<cplx> amps;
  double log_norm = 0.0;

  double squared_amplitude_sum() const noexcept {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    return s;
  }

  /// ln of the true squared norm N(t).
  double log_true_norm() const { return log_norm + std::log(squared_amplitude_sum()); }

  cplx& at_n(int n) { return amps[static_cast<std::size_t>(lattice.index_of(n))]; }
  const cplx& at_n(int n) const { return amps[static_cast<std::size_t>(lattice.index_of(n))]; }
};

namespace detail {

inline double checked_weight(std::span<const cplx> amps) {
  double s = 0.0;
  for (const auto& a : amps) s += std::norm(a);
  if (!(s >= kCollapseThreshold) || !std::isfinite(s))
    throw NumericalError("state collapsed: squared amplitude sum = " + std::to_string(s));
  return s;
}

}  // namespace detail

/// |psi(t0)> = 1/sqrt(2 pi) in angle space, i.e. all weight on n = 0.
inline WaveFunction ground_state(const MomentumLattice& lattice) {
  WaveFunction psi(lattice);
  psi.at_n(0) = 1.0;
  return psi;
}

/// Normalized <p>; independent of log_norm and of any global factor.
inline double expectation_p(const WaveFunction& psi) {
  const double w = detail::checked_weight(psi.amps);
  double s = 0.0;
  for (std::size_t i = 0; i < psi.amps.size(); ++i) s += psi.lattice.momentum_at(i) * std::norm(psi.amps[i]);
  return s / w;
}

/// Normalized <p^2>.
inline double expectation_p2(const WaveFunction& psi) {
  const double w = detail::checked_weight(psi.amps);
  double s = 0.0;
  for (std::size_t i = 0; i < psi.amps.size(); ++i) {
    const double p = psi.lattice.momentum_at(i);
    s += p * p * std::norm(psi.amps[i]);
  }
  return s / w;
}

struct MomentumDistribution {
  double hbar = 1.0;
  std::vector<double> p;
  std::vector<double> prob;

  std::size_t size() const noexcept { return p.size(); }
};

inline MomentumDistribution momentum_distribution(const WaveFunction& psi) {
  const double w = detail::checked_weight(psi.amps);
  MomentumDistribution d;
  d.hbar = psi.lattice.hbar();
  d.p.reserve(psi.amps.size());
  d.prob.reserve(psi.amps.size());
  for (std::size_t i = 0; i < psi.amps.size(); ++i) {
    d.p.push_back(psi.lattice.momentum_at(i));
    d.prob.push_back(std::norm(psi.amps[i]) / w);
  }
  return d;
}

/// Probability carried by the outermost `fraction` of sites (both ends combined).
inline double edge_probability(std::span<const cplx> amps, double fraction = 0.05) {
  const std::size_t m = amps.size();
  const auto edge = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(m) / 2.0));
  double total = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = std::norm(amps[i]);
    total += w;
    if (i < edge || i >= m - edge) tail += w;
  }
  return total > 0.0 ? tail / total : 0.0;
}

/// The central `size` sites of `psi`, on a lattice with the same hbar.
/// log_norm is carried over unchanged.
inline WaveFunction central_window(const WaveFunction& psi, int size) {
  MomentumLattice small(size, psi.lattice.hbar());
  if (size > psi.lattice.size())
    throw ConfigError("window of " + std::to_string(size) + " sites exceeds lattice of " +
                      std::to_string(psi.lattice.size()));
  WaveFunction out(small);
  for (int n = small.n_min(); n <= small.n_max(); ++n) out.at_n(n) = psi.at_n(n);
  out.log_norm = psi.log_norm;
  return out;
}

}  // namespace nqkr
