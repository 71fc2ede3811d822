#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nqkr/errors.hpp"
#include "nqkr/fft.hpp"
#include "nqkr/lattice.hpp"

namespace nqkr {

/// Real root of x^3 = x + 1 (the plastic number).
inline constexpr double kPlasticNumber = 1.3247179572447460;

inline constexpr double default_omega1() { return 2.0 * std::numbers::pi / kPlasticNumber; }
inline constexpr double default_omega2() { return 2.0 * std::numbers::pi / (kPlasticNumber * kPlasticNumber); }

/// Complex kick strength (K + i lambda) with two-tone quasi-periodic modulation.
struct KickSchedule {
  double K = 0.0;
  double lambda = 0.0;
  double eta = 0.75;
  double omega1 = default_omega1();
  double omega2 = default_omega2();

  void validate() const {
    if (!(K >= 0.0) || !std::isfinite(K)) throw ConfigError("K must be finite and >= 0");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 0");
    if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
    if (!(omega1 > 0.0) || !(omega2 > 0.0)) throw ConfigError("modulation frequencies must be positive");
  }
};

/// 1 + eta cos(omega1 t) cos(omega2 t), sampled at integer kick times.
inline double modulation_factor(const KickSchedule& s, int t) {
  if (t < 0) throw ConfigError("kick time must be non-negative");
  const double td = static_cast<double>(t);
  return 1.0 + s.eta * std::cos(s.omega1 * td) * std::cos(s.omega2 * td);
}

struct SimConfig {
  MomentumLattice lattice{4096, 2.89};
  KickSchedule schedule{};
  int kicks = 1000;
  /// 1 gives U_K = exp(-i V_K / hbar); 2 gives the literal exp(-i V_K / 2 hbar).
  double kick_phase_divisor = 1.0;
  double epsilon_shift = 1e-5;
  /// Kick time of step 0. Kicks happen at t = first_kick_time, first_kick_time + 1, ...
  int first_kick_time = 1;
  /// theta_m = angle_origin + 2 pi m / M.
  double angle_origin = 0.0;

  int kick_time(int step) const noexcept { return first_kick_time + step; }

  void validate() const {
    schedule.validate();
    if (kicks < 0) throw ConfigError("kick count must be >= 0");
    if (!(kick_phase_divisor > 0.0) || !std::isfinite(kick_phase_divisor))
      throw ConfigError("kick phase divisor must be positive");
    if (!(epsilon_shift >= 0.0) || !std::isfinite(epsilon_shift))
      throw ConfigError("epsilon shift must be finite and >= 0");
    if (first_kick_time < 0) throw ConfigError("first kick time must be >= 0");
    if (!std::isfinite(angle_origin)) throw ConfigError("angle origin must be finite");
  }
};

/// Split-operator one-kick evolution U(t) = U_f U_K(t).
///
/// The kick is diagonal in angle, the free part in momentum. Moving between the
/// two uses psi(theta_m) = sum_n psi_n e^{i n theta_m} / sqrt(M). Because the
/// kick multiplies in angle space it is a convolution in n, so the storage
/// offset n = i - M/2 drops out and plain unshifted FFTs suffice.
///
/// With lambda > 0 the kick amplifies. The factor exp(lambda s) with
/// s = f / (divisor hbar) bounds the gain, so it is taken out analytically and
/// only exp(lambda s (cos theta - 1)) <= 1 is ever formed numerically.
class Propagator {
 public:
  explicit Propagator(const SimConfig& config)
      : lattice_(config.lattice),
        schedule_(config.schedule),
        divisor_(config.kick_phase_divisor),
        first_kick_time_(config.first_kick_time),
        fft_(config.lattice.size()) {
    config.validate();
    const int m = lattice_.size();
    const double hbar = lattice_.hbar();
    cos_theta_.resize(static_cast<std::size_t>(m));
    free_phase_.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
      cos_theta_[static_cast<std::size_t>(j)] =
          std::cos(config.angle_origin + 2.0 * std::numbers::pi * j / static_cast<double>(m));
    for (int i = 0; i < m; ++i) {
      const double n = lattice_.n_at(static_cast<std::size_t>(i));
      free_phase_[static_cast<std::size_t>(i)] = std::polar(1.0, -n * n * hbar / 2.0);
    }
    if (config.angle_origin != 0.0) {
      origin_phase_.resize(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i)
        origin_phase_[static_cast<std::size_t>(i)] =
            std::polar(1.0, lattice_.n_at(static_cast<std::size_t>(i)) * config.angle_origin);
    }
    work_.resize(static_cast<std::size_t>(m));
  }

  const MomentumLattice& lattice() const noexcept { return lattice_; }
  int kick_time(int step) const noexcept { return first_kick_time_ + step; }

  /// U_K at kick time t. Leaves unit amplitudes and adds ln(squared norm gain) to log_norm.
  void apply_kick(WaveFunction& psi, int t) {
    check_lattice(psi);
    const double log_gain = kick_in_place(psi.amps, t);
    const double w = psi.squared_amplitude_sum();
    if (!(w >= kCollapseThreshold) || !std::isfinite(w))
      throw NumericalError("kick at t=" + std::to_string(t) + " left squared norm " + std::to_string(w) +
                           "; reduce lambda/hbar per kick");
    const double inv = 1.0 / std::sqrt(w);
    for (auto& a : psi.amps) a *= inv;
    psi.log_norm += 2.0 * log_gain + std::log(w);
  }

  /// U_f = exp(-i p^2 / 2 hbar): psi_n *= exp(-i n^2 hbar / 2).
  void apply_free(WaveFunction& psi) const {
    check_lattice(psi);
    for (std::size_t i = 0; i < psi.amps.size(); ++i) psi.amps[i] *= free_phase_[i];
  }

  /// One period: kick at kick_time(step), then free evolution.
  void step(WaveFunction& psi, int step_index) {
    apply_kick(psi, kick_time(step_index));
    apply_free(psi);
  }

  /// Unnormalized U_f U_K(t) acting on raw amplitudes. Used to build the
  /// Floquet matrix column by column.
  void apply_operator(std::span<cplx> amps, int t) {
    if (static_cast<int>(amps.size()) != lattice_.size()) throw ConfigError("amplitude length mismatch");
    const double gain = std::exp(kick_in_place(amps, t));
    for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= gain * free_phase_[i];
  }

 private:
  void check_lattice(const WaveFunction& psi) const {
    if (!(psi.lattice == lattice_)) throw ConfigError("wavefunction lattice differs from propagator lattice");
  }

  // Applies exp(-i K s cos) * exp(lambda s (cos - 1)) and returns lambda * s,
  // the log of the amplitude gain that was left out.
  double kick_in_place(std::span<cplx> amps, int t) {
    const double f = modulation_factor(schedule_, t);
    const double s = f / (divisor_ * lattice_.hbar());
    const double ks = schedule_.K * s;
    const double ls = schedule_.lambda * s;
    const std::size_t m = amps.size();
    const double inv_m = 1.0 / static_cast<double>(m);

    std::copy(amps.begin(), amps.end(), work_.begin());
    if (!origin_phase_.empty())
      for (std::size_t i = 0; i < m; ++i) work_[i] *= origin_phase_[i];
    fft_.backward(work_);
    for (std::size_t j = 0; j < m; ++j) {
      const double c = cos_theta_[j];
      work_[j] *= std::polar(std::exp(ls * (c - 1.0)) * inv_m, -ks * c);
    }
    fft_.forward(work_);
    if (!origin_phase_.empty())
      for (std::size_t i = 0; i < m; ++i) work_[i] *= std::conj(origin_phase_[i]);
    std::copy(work_.begin(), work_.end(), amps.begin());
    return ls;
  }

  MomentumLattice lattice_;
  KickSchedule schedule_;
  double divisor_;
  int first_kick_time_;
  FftPair fft_;
  std::vector<double> cos_theta_;
  std::vector<cplx> free_phase_;
  std::vector<cplx> origin_phase_;
  std::vector<cplx> work_;
};

/// Called after every step with the number of kicks applied so far.
using StepObserver = std::function<void(int kicks, const WaveFunction& psi)>;

/// Probability in the outer 5% of sites above this means the lattice is too small.
inline constexpr double kTailSafetyLimit = 1e-10;

struct EvolutionResult {
  WaveFunction psi;
  double max_edge_probability = 0.0;
  int worst_kick = 0;

  bool tail_safe() const noexcept { return max_edge_probability < kTailSafetyLimit; }
};

/// Runs config.kicks steps from the ground state.
inline EvolutionResult evolve(const SimConfig& config, std::span<const StepObserver> observers = {}) {
  Propagator prop(config);
  EvolutionResult result{ground_state(config.lattice)};
  for (int k = 0; k < config.kicks; ++k) {
    try {
      prop.step(result.psi, k);
      const double edge = edge_probability(result.psi.amps);
      if (edge > result.max_edge_probability) {
        result.max_edge_probability = edge;
        result.worst_kick = k + 1;
      }
      for (const auto& obs : observers) obs(k + 1, result.psi);
    } catch (const EvolutionError&) {
      throw;
    } catch (const std::exception& e) {
      throw EvolutionError(k + 1, e.what());
    }
  }
  return result;
}

inline EvolutionResult evolve(const SimConfig& config, const StepObserver& observer) {
  return evolve(config, std::span<const StepObserver>(&observer, 1));
}

}  // namespace nqkr
