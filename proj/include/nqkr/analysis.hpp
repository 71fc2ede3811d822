#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "nqkr/floquet.hpp"
#include "nqkr/observables.hpp"
#include "nqkr/parallel.hpp"
#include "nqkr/propagator.hpp"

namespace nqkr {

struct OtocRun {
  OtocSeries series;
  EvolutionResult evolution;
  /// States captured after the listed kick counts.
  std::map<int, WaveFunction> snapshots;
};

inline OtocRun run_otoc(const SimConfig& config, const std::vector<int>& snapshot_kicks = {}) {
  OtocRun run{{}, {ground_state(config.lattice)}, {}};
  std::vector<StepObserver> obs;
  obs.push_back(otoc_recorder(run.series, config.epsilon_shift));
  if (!snapshot_kicks.empty())
    obs.push_back([&](int kicks, const WaveFunction& psi) {
      if (std::find(snapshot_kicks.begin(), snapshot_kicks.end(), kicks) != snapshot_kicks.end())
        run.snapshots.insert_or_assign(kicks, psi);
    });
  run.evolution = evolve(config, obs);
  return run;
}

/// Independent runs on a worker pool; results keep the order of `configs`.
inline std::vector<OtocRun> run_otoc_batch(const std::vector<SimConfig>& configs, int jobs,
                                           const std::vector<int>& snapshot_kicks = {}) {
  std::vector<std::optional<OtocRun>> slots(configs.size());
  parallel_for(configs.size(), jobs, [&](std::size_t i) { slots[i] = run_otoc(configs[i], snapshot_kicks); });
  std::vector<OtocRun> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------------------
// Norm growth scans
// ---------------------------------------------------------------------------

struct NormScanEntry {
  double hbar = 0.0;
  double lambda = 0.0;
  NormGrowthFit fit;
  /// ln of the long-time (second-half) mean of N(t).
  double log_mean_norm = 0.0;
  bool tail_safe = true;
};

/// One run per (hbar, lambda); entries come back hbar-major in input order.
inline std::vector<NormScanEntry> norm_scan(const SimConfig& base, const std::vector<double>& hbars,
                                            const std::vector<double>& lambdas, int jobs) {
  std::vector<NormScanEntry> out(hbars.size() * lambdas.size());
  parallel_for(out.size(), jobs, [&](std::size_t k) {
    SimConfig c = base;
    c.lattice = MomentumLattice(base.lattice.size(), hbars[k / lambdas.size()]);
    c.schedule.lambda = lambdas[k % lambdas.size()];
    OtocRun run = run_otoc(c);
    NormScanEntry& e = out[k];
    e.hbar = c.lattice.hbar();
    e.lambda = c.schedule.lambda;
    e.fit = fit_norm_growth(run.series);
    e.log_mean_norm = log_mean_norm(run.series);
    e.tail_safe = run.evolution.tail_safe();
  });
  return out;
}

/// Smallest scanned lambda at this hbar whose mean norm exceeds 1 + tolerance.
inline std::optional<double> estimate_lambda_c(const std::vector<NormScanEntry>& scan, double hbar,
                                               double tolerance = 0.05) {
  std::optional<double> best;
  for (const auto& e : scan)
    if (e.hbar == hbar && e.log_mean_norm > std::log1p(tolerance))
      if (!best || e.lambda < *best) best = e.lambda;
  return best;
}

// ---------------------------------------------------------------------------
// Quasi-eigenstate fidelity
// ---------------------------------------------------------------------------

struct FidelityAnalysis {
  /// Evolved state after `kicks` kicks, restricted to the central dim sites.
  WaveFunction state;
  QuasiSpectrum spectrum;
  FidelityRecord fidelity;
  std::size_t top_bulk = 0;
  /// Probability of the evolved state outside the central window.
  double discarded_probability = 0.0;
};

/// Evolves `kicks` kicks and compares the state with the eigenstates of the
/// operator of the last kick applied, U(t) with t = config.kick_time(kicks - 1).
inline FidelityAnalysis fidelity_analysis(SimConfig config, int kicks, int dim) {
  if (kicks < 1) throw ConfigError("fidelity analysis needs at least one kick");
  config.kicks = kicks;
  const EvolutionResult evo = evolve(config);
  FidelityAnalysis a{central_window(evo.psi, dim), {}, {}, 0, 0.0};
  const double kept = a.state.squared_amplitude_sum();
  a.discarded_probability = std::max(0.0, 1.0 - kept / evo.psi.squared_amplitude_sum());
  a.spectrum = quasi_spectrum(build_floquet_matrix(config, config.kick_time(kicks - 1), dim));
  a.fidelity = fidelity_profile(a.state, a.spectrum);
  a.top_bulk = top_bulk_index(a.spectrum);
  return a;
}

/// True when state k sits in the top quasi-degenerate band of bulk states.
inline bool in_top_band(const QuasiSpectrum& s, std::size_t k, double rel_tol = 1e-3) {
  const double top = s.eps_i(top_bulk_index(s));
  return std::abs(s.eps_i(k) - top) <= rel_tol * std::abs(top);
}

}  // namespace nqkr
