#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_support.hpp"
#include "nqkr/nqkr.hpp"

namespace nqkr::cli {
namespace {

struct PhysicsFlags {
  double K = 0.0;
  double lambda = 0.0;
  double eta = 0.75;
  double hbar = 2.89;
  double epsilon = 1e-5;
  int lattice = 4096;
  double divisor = 1.0;
  int first_kick = 1;

  SimConfig config(int kicks) const {
    SimConfig c;
    c.lattice = MomentumLattice(lattice, hbar);
    c.schedule.K = K;
    c.schedule.lambda = lambda;
    c.schedule.eta = eta;
    c.kicks = kicks;
    c.kick_phase_divisor = divisor;
    c.epsilon_shift = epsilon;
    c.first_kick_time = first_kick;
    c.validate();
    return c;
  }
};

void add_common(CLI::App* sub, PhysicsFlags& f, bool k_required, bool lambda_required) {
  auto* k = sub->add_option("--K", f.K, "real kick strength K");
  auto* l = sub->add_option("--lambda", f.lambda, "imaginary kick strength lambda");
  if (k_required) k->required();
  if (lambda_required) l->required();
  sub->add_option("--eta", f.eta, "modulation strength")->capture_default_str();
  sub->add_option("--hbar", f.hbar, "effective Planck constant")->capture_default_str();
  sub->add_option("--epsilon", f.epsilon, "OTOC translation parameter")->capture_default_str();
  sub->add_option("--lattice", f.lattice, "number of momentum sites (even)")->capture_default_str();
  sub->add_option("--kick-divisor", f.divisor, "1: exp(-iV/hbar), 2: exp(-iV/2hbar)")->capture_default_str();
  sub->add_option("--first-kick", f.first_kick, "kick time of the first step")->capture_default_str();
}

void warn_tail(const EvolutionResult& e) {
  if (!e.tail_safe())
    std::cerr << "warning: probability " << e.max_edge_probability << " reached the outer 5% of the lattice at kick "
              << e.worst_kick << "; enlarge --lattice\n";
}

std::string fmt(double v) { return fmt15(v); }

// ---------------------------------------------------------------------------

int cmd_evolve(const PhysicsFlags& f, int kicks, const std::vector<int>& snapshots, const std::string& out,
               const std::vector<std::string>& args) {
  const SimConfig c = f.config(kicks);
  std::vector<int> snaps = snapshots;
  if (snaps.empty() && kicks > 0) snaps.push_back(kicks);
  for (int s : snaps)
    if (s < 1 || s > kicks) throw ConfigError("snapshot time " + std::to_string(s) + " outside 1.." + std::to_string(kicks));

  RunRecorder rec(make_run_dir(out, "evolve"), "evolve", args);
  rec.set_config(c);
  const OtocRun run = run_otoc(c, snaps);
  warn_tail(run.evolution);

  write_series_csv(rec.output("series.csv"), run.series);
  nlohmann::json summary;
  summary["tail_safe"] = run.evolution.tail_safe();
  summary["max_edge_probability"] = run.evolution.max_edge_probability;
  for (const auto& [t, psi] : run.snapshots) {
    const auto dist = momentum_distribution(psi);
    write_distribution_csv(rec.output("dist_t" + std::to_string(t) + ".csv"), dist);
    try {
      summary["profiles"][std::to_string(t)] = to_json(compare_profiles(dist));
    } catch (const FitError& e) {
      summary["profiles"][std::to_string(t)] = {{"error", e.what()}};
    }
  }
  if (kicks >= 20) {
    const double D = scrambling_rate(run.series);
    const auto mu = fit_norm_growth(run.series);
    summary["scrambling_rate"] = D;
    summary["norm_growth"] = to_json(mu);
    std::cout << "D = " << fmt(D) << "  (eps K)^2/2 = " << fmt(c.epsilon_shift * c.epsilon_shift * c.schedule.K * c.schedule.K / 2)
              << "\nmu = " << fmt(mu.mu) << "\n";
  }
  if (kicks >= kMinFeatureKicks) {
    const auto feats = extract_features(run.series);
    summary["features"] = to_json(feats);
    summary["rho"] = classify(feats);
    std::cout << "R = " << fmt(feats.doubling_ratio) << "  rho = " << fmt(classify(feats)) << "\n";
  }
  write_json(rec.output("summary.json"), summary);
  rec.add("summary", summary);
  rec.finish();
  std::cout << "wrote " << rec.dir().string() << "\n";
  return 0;
}

int cmd_spectrum(const PhysicsFlags& f, int t, int dim, bool with_fidelity, int dump_states, const std::string& out,
                 const std::vector<std::string>& args) {
  if (dim < 2 || dim % 2 != 0) throw ConfigError("--dim must be an even integer >= 2");
  if (dim > kMaxSpectrumDim) throw ConfigError("--dim above " + std::to_string(kMaxSpectrumDim));
  if (t < 0) throw ConfigError("--t must be >= 0");
  SimConfig c = f.config(0);
  RunRecorder rec(make_run_dir(out, "spectrum"), "spectrum", args);

  QuasiSpectrum spec;
  nlohmann::json results;
  if (with_fidelity) {
    const int kicks = t - c.first_kick_time + 1;
    if (kicks < 1) throw ConfigError("--with-fidelity needs --t >= --first-kick");
    c.kicks = kicks;
    const FidelityAnalysis a = fidelity_analysis(c, kicks, dim);
    spec = a.spectrum;
    const auto state_dist = momentum_distribution(a.state);
    const WaveFunction best = eigenstate_wavefunction(spec, a.fidelity.best.index, a.state.lattice);
    const auto eig_dist = momentum_distribution(best);
    write_distribution_csv(rec.output("state_dist.csv"), state_dist);
    write_distribution_csv(rec.output("eigenstate_dist.csv"), eig_dist);

    nlohmann::json fid = to_json(a.fidelity);
    fid["top_bulk"] = {{"index", a.top_bulk}, {"eps_i", spec.eps_i(a.top_bulk)}};
    fid["best_in_top_band"] = in_top_band(spec, a.fidelity.best.index);
    fid["discarded_probability"] = a.discarded_probability;
    try {
      fid["state_profile"] = to_json(fit_exponential_profile(state_dist));
      fid["eigenstate_profile"] = to_json(fit_exponential_profile(eig_dist));
    } catch (const FitError& e) {
      fid["profile_error"] = e.what();
    }
    write_json(rec.output("fidelity.json"), fid);
    results["fidelity"] = fid["best"];
    results["best_in_top_band"] = fid["best_in_top_band"];
    std::cout << "best fidelity " << fmt(a.fidelity.best.fidelity) << " at eps_i = " << fmt(a.fidelity.best.eps_i)
              << "; top bulk eps_i = " << fmt(spec.eps_i(a.top_bulk)) << "\n";
  } else {
    spec = quasi_spectrum(build_floquet_matrix(c, t, dim));
  }
  c.kicks = std::max(c.kicks, 0);
  rec.set_config(c);
  write_spectrum_csv(rec.output("spectrum.csv"), spec);
  const int dump = std::min<int>(dump_states, static_cast<int>(spec.size()));
  for (int k = 0; k < dump; ++k)
    write_distribution_csv(rec.output("eigenstate_" + std::to_string(k) + ".csv"),
                           momentum_distribution(eigenstate_wavefunction(spec, static_cast<std::size_t>(k),
                                                                         MomentumLattice(dim, c.lattice.hbar()))));

  double max_abs = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) max_abs = std::max(max_abs, std::abs(spec.eps_i(k)));
  results["max_abs_eps_i"] = max_abs;
  results["mean_abs_eps_i"] = mean_abs_imag(spec);
  results["rejected_pairs"] = spec.rejected_count();
  results["kick_time"] = t;
  results["dim"] = dim;
  rec.add("spectrum", results);
  rec.finish();
  std::cout << "max |eps_i| = " << fmt(max_abs) << "  mean |eps_i| = " << fmt(mean_abs_imag(spec))
            << "  rejected pairs = " << spec.rejected_count() << "\nwrote " << rec.dir().string() << "\n";
  return 0;
}

void write_phase_plot(const std::filesystem::path& path, const PhaseDiagram& d) {
  std::ofstream gp(path);
  gp << "# gnuplot script\nset xlabel '" << d.axis2.name << "'\nset ylabel '" << d.axis1.name
     << "'\nset cblabel 'rho'\nset cbrange [0:1]\nset view map\n"
     << "plot 'phase.dat' matrix nonuniform with image notitle, \\\n"
     << "     'boundary.csv' skip 1 using 1:3 with linespoints lw 2 title 'rho = 0.5'\n";
}

int cmd_phase_diagram(const PhysicsFlags& f, const std::string& plane, const std::string& k_range,
                      const std::string& eta_range, const std::string& lambda_range, int kicks, int jobs,
                      const std::string& out, const std::vector<std::string>& args) {
  PhaseDiagramRequest req;
  if (plane == "eta-K")
    req.plane = PhasePlane::EtaK;
  else if (plane == "lambda-K")
    req.plane = PhasePlane::LambdaK;
  else
    throw ConfigError("--plane must be eta-K or lambda-K");
  req.axis2 = parse_range(k_range);
  req.axis1 = parse_range(req.plane == PhasePlane::EtaK ? eta_range : lambda_range);
  req.base = f.config(kicks);
  req.kicks = kicks;
  req.jobs = jobs;
  req.progress = [](std::size_t done, std::size_t total) { std::cerr << "[" << done << "/" << total << "]\n"; };
  if (req.axis1.size() < 2 || req.axis2.size() < 2) throw ConfigError("phase diagram grid must be at least 2x2");
  if (kicks < 500) throw ConfigError("--kicks must be >= 500 for phase diagrams");

  RunRecorder rec(make_run_dir(out, "phase-diagram"), "phase-diagram", args);
  rec.set_config(req.base);
  const PhaseDiagram d = phase_diagram(req);
  write_phase_csv(rec.output("phase.csv"), d);
  write_phase_matrix(rec.output("phase.dat"), d);
  write_json(rec.output("phase.json"), to_json(d));
  {
    std::ofstream b(rec.output("boundary.csv"));
    b << "axis2,kind,axis1\n";
    for (const auto& p : d.boundary) {
      b << fmt(p.axis2) << ',';
      if (p.kind == BoundaryPoint::Kind::Crossing)
        b << "crossing," << fmt(p.axis1) << '\n';
      else
        b << (p.kind == BoundaryPoint::Kind::AboveRange ? "above_range," : "below_range,") << '\n';
    }
  }
  write_phase_plot(rec.output("plot_phase.gp"), d);
  rec.add("boundary", to_json(d)["boundary"]);
  rec.finish();
  for (const auto& p : d.boundary) {
    std::cout << "K = " << fmt(p.axis2) << "  " << d.axis1.name << "_c = ";
    if (p.kind == BoundaryPoint::Kind::Crossing)
      std::cout << fmt(p.axis1) << "\n";
    else
      std::cout << (p.kind == BoundaryPoint::Kind::AboveRange ? "above range\n" : "below range\n");
  }
  std::cout << "wrote " << rec.dir().string() << "\n";
  return 0;
}

int cmd_norm_scan(const PhysicsFlags& f, const std::string& lambda_list, const std::string& lambda_range,
                  const std::string& hbar_list, int kicks, double tolerance, int jobs, const std::string& out,
                  const std::vector<std::string>& args) {
  if (lambda_list.empty() == lambda_range.empty())
    throw ConfigError("give exactly one of --lambda-list or --lambda-range");
  const auto lambdas = lambda_list.empty() ? parse_range(lambda_range) : parse_list(lambda_list);
  const auto hbars = hbar_list.empty() ? std::vector<double>{f.hbar} : parse_list(hbar_list);
  if (kicks < 20) throw ConfigError("--kicks must be >= 20 for norm fits");
  const SimConfig base = f.config(kicks);

  RunRecorder rec(make_run_dir(out, "norm-scan"), "norm-scan", args);
  rec.set_config(base);
  const auto scan = norm_scan(base, hbars, lambdas, jobs);
  {
    std::ofstream csv(rec.output("norm_scan.csv"));
    csv << "hbar,lambda,mu,intercept,r_squared,log_mean_norm,tail_safe\n";
    for (const auto& e : scan)
      csv << fmt(e.hbar) << ',' << fmt(e.lambda) << ',' << fmt(e.fit.mu) << ',' << fmt(e.fit.intercept) << ','
          << fmt(e.fit.r_squared) << ',' << fmt(e.log_mean_norm) << ',' << (e.tail_safe ? 1 : 0) << '\n';
  }
  nlohmann::json lc = nlohmann::json::array();
  std::cout << "hbar        lambda      mu              ln(mean N)\n";
  for (const auto& e : scan) {
    std::cout << fmt(e.hbar) << "\t" << fmt(e.lambda) << "\t" << fmt(e.fit.mu) << "\t" << fmt(e.log_mean_norm) << "\n";
    if (!e.tail_safe) std::cerr << "warning: lattice edge reached at hbar=" << e.hbar << " lambda=" << e.lambda << "\n";
  }
  for (double h : hbars) {
    const auto est = estimate_lambda_c(scan, h, tolerance);
    lc.push_back({{"hbar", h}, {"lambda_c", est ? nlohmann::json(*est) : nlohmann::json(nullptr)}});
    std::cout << "lambda_c(hbar=" << fmt(h) << ") = " << (est ? fmt(*est) : std::string("not reached")) << "\n";
  }
  write_json(rec.output("lambda_c.json"), {{"tolerance", tolerance}, {"estimates", lc}});
  rec.add("lambda_c", lc);
  rec.finish();
  std::cout << "wrote " << rec.dir().string() << "\n";
  return 0;
}

std::vector<std::string> replay_args(const std::string& manifest_path, const std::string& out) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("cannot read manifest " + manifest_path);
  const auto m = nlohmann::json::parse(in);
  if (m.value("schema_version", 0) != kManifestSchemaVersion) throw ConfigError("unsupported manifest schema");
  std::vector<std::string> args = m.at("args").get<std::vector<std::string>>();
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    kept.push_back(args[i]);
  }
  if (!out.empty()) {
    kept.push_back("--out");
    kept.push_back(out);
  }
  return kept;
}

}  // namespace

int run(std::vector<std::string> args) {
  CLI::App app{"Quasi-periodically kicked non-Hermitian rotor: OTOC scrambling, Floquet spectra, phase diagrams"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  const std::vector<std::string> original = args;

  PhysicsFlags phys;
  std::string out;
  int kicks = 0;
  int jobs = default_jobs();

  auto* evolve_cmd = app.add_subcommand("evolve", "evolve from the ground state and record C(t), norm and profiles");
  add_common(evolve_cmd, phys, true, true);
  evolve_cmd->add_option("--kicks", kicks, "number of kicks")->required()->check(CLI::NonNegativeNumber);
  std::vector<int> snapshots;
  evolve_cmd->add_option("--snapshot-times", snapshots, "kick counts at which to save momentum distributions")
      ->delimiter(',');
  evolve_cmd->add_option("--out", out, "output directory (default runs/<timestamp>-evolve)");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "quasienergies of the one-kick Floquet operator");
  add_common(spectrum_cmd, phys, true, true);
  int t = 0, dim = 1024, dump = 0;
  bool with_fidelity = false;
  spectrum_cmd->add_option("--t", t, "kick time of the operator")->required();
  spectrum_cmd->add_option("--dim", dim, "Floquet matrix dimension (even, <= 2048)")->capture_default_str();
  spectrum_cmd->add_flag("--with-fidelity", with_fidelity, "evolve the ground state to t and compare");
  spectrum_cmd->add_option("--dump-states", dump, "write distributions of the N states with largest eps_i");
  spectrum_cmd->add_option("--out", out, "output directory");

  auto* phase_cmd = app.add_subcommand("phase-diagram", "classify C(t) over a 2-D parameter grid");
  add_common(phase_cmd, phys, false, false);
  std::string plane, k_range = "1:10:10", eta_range = "0:1:11", lambda_range = "0:5:11";
  int phase_kicks = 1000;
  phase_cmd->add_option("--plane", plane, "eta-K or lambda-K")->required();
  phase_cmd->add_option("--k-range", k_range, "K grid start:stop:count")->capture_default_str();
  phase_cmd->add_option("--eta-range", eta_range, "eta grid start:stop:count")->capture_default_str();
  phase_cmd->add_option("--lambda-range", lambda_range, "lambda grid start:stop:count")->capture_default_str();
  phase_cmd->add_option("--kicks", phase_kicks, "kicks per point")->capture_default_str();
  phase_cmd->add_option("--jobs", jobs, "worker threads (env NQKR_JOBS)");
  phase_cmd->add_option("--out", out, "output directory");

  auto* norm_cmd = app.add_subcommand("norm-scan", "norm growth rate and mean norm versus lambda");
  add_common(norm_cmd, phys, true, false);
  std::string lambda_list, norm_lambda_range, hbar_list;
  double tolerance = 0.05;
  norm_cmd->add_option("--lambda-list", lambda_list, "comma-separated lambda values");
  norm_cmd->add_option("--lambda-range", norm_lambda_range, "lambda grid start:stop:count");
  norm_cmd->add_option("--hbar-list", hbar_list, "comma-separated hbar values (default --hbar)");
  norm_cmd->add_option("--kicks", kicks, "number of kicks")->required();
  norm_cmd->add_option("--tolerance", tolerance, "mean norm above 1 + tolerance marks lambda_c")->capture_default_str();
  norm_cmd->add_option("--jobs", jobs, "worker threads (env NQKR_JOBS)");
  norm_cmd->add_option("--out", out, "output directory");

  auto* repro_cmd = app.add_subcommand("reproduce", "run a canned figure recipe and check it");
  std::string figure;
  repro_cmd->add_option("figure", figure, "figure id")->required()->check(CLI::IsMember(figure_ids()));
  repro_cmd->add_option("--jobs", jobs, "worker threads (env NQKR_JOBS)");
  repro_cmd->add_option("--out", out, "output directory");

  auto* replay_cmd = app.add_subcommand("replay", "re-execute the command recorded in a manifest");
  std::string manifest;
  replay_cmd->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();
  replay_cmd->add_option("--out", out, "output directory for the new run");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*evolve_cmd) return cmd_evolve(phys, kicks, snapshots, out, original);
    if (*spectrum_cmd) return cmd_spectrum(phys, t, dim, with_fidelity, dump, out, original);
    if (*phase_cmd)
      return cmd_phase_diagram(phys, plane, k_range, eta_range, lambda_range, phase_kicks, jobs, out, original);
    if (*norm_cmd)
      return cmd_norm_scan(phys, lambda_list, norm_lambda_range, hbar_list, kicks, tolerance, jobs, out, original);
    if (*repro_cmd) return reproduce(figure, out, jobs, original);
    if (*replay_cmd) return run(replay_args(manifest, out));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace nqkr::cli
