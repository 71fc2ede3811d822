#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nqkr/analysis.hpp"
#include "nqkr/classifier.hpp"
#include "nqkr/floquet.hpp"
#include "nqkr/lattice.hpp"
#include "nqkr/observables.hpp"
#include "nqkr/propagator.hpp"

namespace nqkr {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kManifestSchemaVersion = 1;

/// 15 significant digits, shortest form.
inline std::string fmt15(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

namespace detail {
inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}
}  // namespace detail

inline void write_distribution_csv(const std::filesystem::path& path, const MomentumDistribution& d) {
  auto out = detail::open_out(path);
  out << "p,prob\n";
  for (std::size_t i = 0; i < d.size(); ++i) out << fmt15(d.p[i]) << ',' << fmt15(d.prob[i]) << '\n';
}

inline void write_series_csv(const std::filesystem::path& path, const OtocSeries& s) {
  auto out = detail::open_out(path);
  out << "t,c_exact,c_approx,log_norm,mean_p,mean_p2\n";
  for (const auto& r : s.records)
    out << r.t << ',' << fmt15(r.c_exact) << ',' << fmt15(r.c_approx) << ',' << fmt15(r.log_norm) << ','
        << fmt15(r.mean_p) << ',' << fmt15(r.mean_p2) << '\n';
}

inline OtocSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "t,c_exact,c_approx,log_norm,mean_p,mean_p2") throw Error("unexpected series header in " + path.string());
  OtocSeries s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    OtocRecord r;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf", &r.t, &r.c_exact, &r.c_approx, &r.log_norm, &r.mean_p,
                    &r.mean_p2) != 6)
      throw Error("malformed series row: " + line);
    s.push(r);
  }
  return s;
}

inline void write_spectrum_csv(const std::filesystem::path& path, const QuasiSpectrum& s) {
  auto out = detail::open_out(path);
  out << "eps_r,eps_i,residual\n";
  for (std::size_t k = 0; k < s.size(); ++k)
    out << fmt15(s.eps_r(k)) << ',' << fmt15(s.eps_i(k)) << ',' << fmt15(s.residuals[k]) << '\n';
}

inline void write_phase_csv(const std::filesystem::path& path, const PhaseDiagram& d) {
  auto out = detail::open_out(path);
  out << "axis1,axis2,rho\n";
  for (const auto& p : d.points) out << fmt15(p.axis1) << ',' << fmt15(p.axis2) << ',' << fmt15(p.rho) << '\n';
}

/// gnuplot `matrix nonuniform` layout: first row axis2 values, first column axis1 values.
inline void write_phase_matrix(const std::filesystem::path& path, const PhaseDiagram& d) {
  auto out = detail::open_out(path);
  out << d.axis2.values.size();
  for (double v : d.axis2.values) out << ' ' << fmt15(v);
  out << '\n';
  for (std::size_t i1 = 0; i1 < d.axis1.values.size(); ++i1) {
    out << fmt15(d.axis1.values[i1]);
    for (std::size_t i2 = 0; i2 < d.axis2.values.size(); ++i2) out << ' ' << fmt15(d.at(i1, i2).rho);
    out << '\n';
  }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// JSON views
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ProfileFit& f) {
  return {{"kind", to_string(f.kind)},      {"xi_or_sigma", f.xi_or_sigma}, {"r_squared", f.r_squared},
          {"intercept", f.intercept},       {"fit_window", {f.p_abs_min, f.p_abs_max}},
          {"points", f.points}};
}

inline nlohmann::json to_json(const ProfileComparison& c) {
  nlohmann::json j;
  j["exponential"] = c.exponential ? to_json(*c.exponential) : nlohmann::json(nullptr);
  j["gaussian"] = c.gaussian ? to_json(*c.gaussian) : nlohmann::json(nullptr);
  j["best"] = to_string(c.best.kind);
  return j;
}

inline nlohmann::json to_json(const NormGrowthFit& f) {
  return {{"mu", f.mu}, {"intercept", f.intercept}, {"fit_window", {f.window.first, f.window.last}},
          {"r_squared", f.r_squared}};
}

inline nlohmann::json to_json(const FidelityRecord& r) {
  nlohmann::json overlaps = nlohmann::json::array();
  for (const auto& o : r.overlaps) overlaps.push_back({{"index", o.index}, {"eps_i", o.eps_i}, {"fidelity", o.fidelity}});
  return {{"t", r.kick_time},
          {"best", {{"index", r.best.index}, {"eps_i", r.best.eps_i}, {"fidelity", r.best.fidelity}}},
          {"overlaps", overlaps}};
}

inline nlohmann::json to_json(const PhaseFeatures& f) {
  return {{"late_slope_normalized", f.late_slope_normalized},
          {"doubling_ratio", f.doubling_ratio},
          {"saturation_r2", f.saturation_r2}};
}

inline nlohmann::json to_json(const PhaseDiagram& d) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : d.points)
    points.push_back({{"axis1", p.axis1}, {"axis2", p.axis2}, {"rho", p.rho}, {"features", to_json(p.features)}});
  nlohmann::json boundary = nlohmann::json::array();
  for (const auto& b : d.boundary) {
    const char* kind = b.kind == BoundaryPoint::Kind::Crossing     ? "crossing"
                       : b.kind == BoundaryPoint::Kind::AboveRange ? "above_range"
                                                                   : "below_range";
    nlohmann::json e = {{"axis2", b.axis2}, {"kind", kind}};
    e["axis1"] = b.kind == BoundaryPoint::Kind::Crossing ? nlohmann::json(b.axis1) : nlohmann::json(nullptr);
    boundary.push_back(e);
  }
  return {{"plane", to_string(d.plane)},
          {"axis1", {{"name", d.axis1.name}, {"values", d.axis1.values}}},
          {"axis2", {{"name", d.axis2.name}, {"values", d.axis2.values}}},
          {"points", points},
          {"boundary", boundary}};
}

inline nlohmann::json to_json(const SimConfig& c) {
  return {{"lattice", c.lattice.size()},
          {"hbar", c.lattice.hbar()},
          {"K", c.schedule.K},
          {"lambda", c.schedule.lambda},
          {"eta", c.schedule.eta},
          {"omega1", c.schedule.omega1},
          {"omega2", c.schedule.omega2},
          {"kicks", c.kicks},
          {"kick_phase_divisor", c.kick_phase_divisor},
          {"epsilon_shift", c.epsilon_shift},
          {"first_kick_time", c.first_kick_time},
          {"angle_origin", c.angle_origin},
          {"kappa", kPlasticNumber}};
}

}  // namespace nqkr
