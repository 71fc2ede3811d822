#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <vector>

#include "nqkr/errors.hpp"
#include "nqkr/lattice.hpp"
#include "nqkr/propagator.hpp"

namespace nqkr {

/// Largest Floquet matrix the dense eigensolver is asked to handle.
inline constexpr int kMaxSpectrumDim = 2048;
/// Eigenpairs with ||U phi - u phi|| above this are flagged as unreliable.
inline constexpr double kResidualTolerance = 1e-8;

/// Instantaneous one-kick Floquet operator U(t) = U_f U_K(t) on a truncated lattice.
struct FloquetOperator {
  MomentumLattice lattice;
  int kick_time = 0;
  Eigen::MatrixXcd matrix;
};

/// Column j is the propagator applied to the basis state |n_j>, so the matrix
/// and the FFT evolution share every floating-point operation.
inline FloquetOperator build_floquet_matrix(const SimConfig& config, int kick_time, int dim) {
  if (dim < 2 || dim % 2 != 0) throw ConfigError("Floquet dimension must be even and >= 2");
  if (dim > kMaxSpectrumDim)
    throw ConfigError("Floquet dimension " + std::to_string(dim) + " exceeds the dense budget of " +
                      std::to_string(kMaxSpectrumDim));
  SimConfig local = config;
  local.lattice = MomentumLattice(dim, config.lattice.hbar());
  Propagator prop(local);
  FloquetOperator op{local.lattice, kick_time, Eigen::MatrixXcd::Zero(dim, dim)};
  std::vector<cplx> column(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim; ++j) {
    std::fill(column.begin(), column.end(), cplx{});
    column[static_cast<std::size_t>(j)] = 1.0;
    prop.apply_operator(column, kick_time);
    for (int i = 0; i < dim; ++i) op.matrix(i, j) = column[static_cast<std::size_t>(i)];
  }
  return op;
}

/// Eigen-decomposition of a one-kick operator, u = exp(-i eps), eps = eps_r + i eps_i.
///
/// Pairs are sorted by descending eps_i. Eigenvectors have unit 2-norm and
/// their largest-magnitude component is made real and positive.
struct QuasiSpectrum {
  int kick_time = 0;
  std::vector<cplx> eigenvalues;
  std::vector<cplx> quasienergies;
  Eigen::MatrixXcd eigenstates;
  std::vector<double> residuals;
  /// Probability of each eigenstate in the outer 5% of lattice sites.
  std::vector<double> edge_weights;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  double eps_i(std::size_t k) const { return quasienergies[k].imag(); }
  double eps_r(std::size_t k) const { return quasienergies[k].real(); }
  bool accepted(std::size_t k) const { return residuals[k] < kResidualTolerance; }
  std::size_t rejected_count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < size(); ++k) n += accepted(k) ? 0 : 1;
    return n;
  }
};

/// eps_r = -arg(u) folded into (-pi, pi], eps_i = ln|u|.
inline cplx quasienergy_of(cplx u) {
  double er = -std::arg(u);
  if (er <= -std::numbers::pi) er += 2.0 * std::numbers::pi;
  return {er, std::log(std::abs(u))};
}

inline QuasiSpectrum quasi_spectrum(const Eigen::MatrixXcd& u, int kick_time = 0) {
  if (u.rows() != u.cols() || u.rows() == 0) throw ConfigError("quasi_spectrum needs a non-empty square matrix");
  if (!u.allFinite()) throw NumericalError("quasi_spectrum: matrix has non-finite entries");

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(u, true);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigensolver did not converge (dim " + std::to_string(u.rows()) + ", Frobenius norm " +
                         std::to_string(u.norm()) + ", max |entry| " + std::to_string(u.cwiseAbs().maxCoeff()) + ")");

  const Eigen::Index m = u.rows();
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ia = std::log(std::abs(values(a))), ib = std::log(std::abs(values(b)));
    if (ia != ib) return ia > ib;
    return quasienergy_of(values(a)).real() < quasienergy_of(values(b)).real();
  });

  QuasiSpectrum s;
  s.kick_time = kick_time;
  s.eigenstates.resize(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    const cplx val = values(src);
    Eigen::VectorXcd v = vectors.col(src);
    v /= v.norm();
    Eigen::Index peak = 0;
    v.cwiseAbs().maxCoeff(&peak);
    v *= std::conj(v(peak)) / std::abs(v(peak));
    v(peak) = std::abs(v(peak));

    s.eigenvalues.push_back(val);
    s.quasienergies.push_back(quasienergy_of(val));
    s.residuals.push_back((u * v - val * v).norm());
    s.edge_weights.push_back(edge_probability(std::span<const cplx>(v.data(), static_cast<std::size_t>(m))));
    s.eigenstates.col(k) = v;
  }
  return s;
}

inline QuasiSpectrum quasi_spectrum(const FloquetOperator& op) { return quasi_spectrum(op.matrix, op.kick_time); }

/// Mean of |eps_i| over all eigenvalues.
inline double mean_abs_imag(const QuasiSpectrum& s) {
  if (s.size() == 0) return 0.0;
  double acc = 0.0;
  for (const auto& e : s.quasienergies) acc += std::abs(e.imag());
  return acc / static_cast<double>(s.size());
}

/// Index of the largest eps_i among states with edge weight below `edge_limit`.
/// States piled up at the lattice boundary are truncation artefacts of the
/// finite matrix and are skipped.
inline std::size_t top_bulk_index(const QuasiSpectrum& s, double edge_limit = 1e-6) {
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s.edge_weights[k] < edge_limit) return k;
  throw NumericalError("no eigenstate is localized away from the lattice boundary");
}

struct FidelityRecord {
  struct Overlap {
    std::size_t index = 0;
    double eps_i = 0.0;
    /// |<psi^|phi^>| for unit-normalized states.
    double fidelity = 0.0;
    double squared() const noexcept { return fidelity * fidelity; }
  };
  int kick_time = 0;
  std::vector<Overlap> overlaps;
  Overlap best;
};

/// Overlap of the normalized state with every quasi-eigenstate.
inline FidelityRecord fidelity_profile(const WaveFunction& psi, const QuasiSpectrum& s) {
  const auto m = static_cast<Eigen::Index>(psi.amps.size());
  if (m != s.eigenstates.rows())
    throw ConfigError("fidelity_profile: state has " + std::to_string(m) + " sites, spectrum " +
                      std::to_string(s.eigenstates.rows()));
  Eigen::Map<const Eigen::VectorXcd> raw(psi.amps.data(), m);
  const double w = raw.norm();
  if (!(w * w >= kCollapseThreshold)) throw NumericalError("fidelity_profile: zero state");

  FidelityRecord rec;
  rec.kick_time = s.kick_time;
  const Eigen::VectorXcd proj = s.eigenstates.adjoint() * raw;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double f = std::min(1.0, std::abs(proj(static_cast<Eigen::Index>(k))) / w);
    rec.overlaps.push_back({k, s.eps_i(k), f});
    if (k == 0 || f > rec.best.fidelity) rec.best = rec.overlaps.back();
  }
  return rec;
}

/// Wraps eigenstate k as a WaveFunction on `lattice`.
inline WaveFunction eigenstate_wavefunction(const QuasiSpectrum& s, std::size_t k, const MomentumLattice& lattice) {
  if (lattice.size() != s.eigenstates.rows()) throw ConfigError("eigenstate_wavefunction: lattice size mismatch");
  WaveFunction out(lattice);
  for (Eigen::Index i = 0; i < s.eigenstates.rows(); ++i)
    out.amps[static_cast<std::size_t>(i)] = s.eigenstates(i, static_cast<Eigen::Index>(k));
  return out;
}

}  // namespace nqkr
