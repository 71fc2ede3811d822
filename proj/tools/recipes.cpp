// Canned reproductions of the published figures. Each recipe writes its data,
// a gnuplot script, and prints one PASS/FAIL line per check.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "cli_support.hpp"
#include "commands.hpp"
#include "nqkr/nqkr.hpp"

namespace nqkr::cli {
namespace {

class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << what << "\n";
    results_.push_back({{"check", what}, {"pass", ok}});
    failures_ += ok ? 0 : 1;
  }
  int exit_code() const { return failures_ == 0 ? 0 : 1; }
  const nlohmann::json& results() const { return results_; }

 private:
  nlohmann::json results_ = nlohmann::json::array();
  int failures_ = 0;
};

std::string f(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

SimConfig recipe_config(double K, double lambda, int kicks) {
  SimConfig c;
  c.schedule.K = K;
  c.schedule.lambda = lambda;
  c.kicks = kicks;
  return c;
}

std::string series_name(const std::string& key, double v) { return "series_" + key + f(v) + ".csv"; }

void write_script(RunRecorder& rec, const std::string& body) {
  std::ofstream gp(rec.output("plot.gp"));
  gp << "# gnuplot script\nset datafile separator ','\n" << body;
}

// C(t) for several K at lambda = 0.
void fig1a(RunRecorder& rec, Checks& chk, int jobs) {
  const std::vector<double> ks{1, 4, 5, 7, 10};
  std::vector<SimConfig> configs;
  for (double k : ks) configs.push_back(recipe_config(k, 0, 1000));
  const auto runs = run_otoc_batch(configs, jobs);
  std::string plot = "set xlabel 't'\nset ylabel 'C'\nset logscale xy\nplot ";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    write_series_csv(rec.output(series_name("K", ks[i])), runs[i].series);
    const auto ft = extract_features(runs[i].series);
    std::cout << "K = " << ks[i] << "  R = " << f(ft.doubling_ratio) << "  rho = " << f(classify(ft)) << "\n";
    plot += "'" + series_name("K", ks[i]) + "' skip 1 using 1:3 with lines title 'K=" + f(ks[i]) + "', ";
  }
  plot += "x*(1e-5*10)**2/2 dt 2 title '(eps K)^2 t/2'\n";
  write_script(rec, plot);
  const auto f10 = extract_features(runs[4].series);
  const auto f1 = extract_features(runs[0].series);
  chk.expect(f10.doubling_ratio > 1.8, "K=10: doubling ratio " + f(f10.doubling_ratio) + " > 1.8");
  chk.expect(classify(f10) > 0.9, "K=10: rho " + f(classify(f10)) + " > 0.9 (linear growth)");
  chk.expect(f1.doubling_ratio < 1.2, "K=1: doubling ratio " + f(f1.doubling_ratio) + " < 1.2");
}

void fig1b(RunRecorder& rec, Checks& chk, int jobs) {
  const std::vector<double> ks{4, 10};
  std::vector<SimConfig> configs;
  for (double v : ks) configs.push_back(recipe_config(v, 0, 1000));
  const auto runs = run_otoc_batch(configs, jobs, {1000});
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const auto d = momentum_distribution(runs[i].snapshots.at(1000));
    write_distribution_csv(rec.output("dist_K" + f(ks[i]) + ".csv"), d);
    const auto c = compare_profiles(d);
    const double re = c.exponential ? c.exponential->r_squared : 0, rg = c.gaussian ? c.gaussian->r_squared : 0;
    std::cout << "K = " << ks[i] << "  r2(exp) = " << f(re) << "  r2(gauss) = " << f(rg) << "\n";
    if (i == 0)
      chk.expect(re > rg, "K=4: exponential profile fits better (" + f(re) + " > " + f(rg) + ")");
    else
      chk.expect(rg > re, "K=10: Gaussian profile fits better (" + f(rg) + " > " + f(re) + ")");
  }
  write_script(rec,
               "set xlabel 'p'\nset ylabel '|psi(p)|^2'\nset logscale y\nset yrange [1e-25:1]\n"
               "plot 'dist_K4.csv' skip 1 with points title 'K=4', 'dist_K10.csv' skip 1 with points title 'K=10'\n");
}

void fig1d(RunRecorder& rec, Checks& chk, int jobs) {
  const std::vector<double> ks{5, 6, 7, 8, 9, 10};
  std::vector<double> rates(ks.size());
  parallel_for(ks.size(), jobs, [&](std::size_t i) {
    rates[i] = scrambling_rate(run_otoc(recipe_config(ks[i], 0, 1000)).series);
  });
  std::ofstream csv(rec.output("rate_vs_K.csv"));
  csv << "K,D,prediction\n";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double pred = 1e-10 * ks[i] * ks[i] / 2.0;
    csv << fmt15(ks[i]) << ',' << fmt15(rates[i]) << ',' << fmt15(pred) << '\n';
    chk.expect(std::abs(rates[i] / pred - 1.0) <= 0.3,
               "K=" + f(ks[i]) + ": D = " + f(rates[i]) + " within 30% of (eps K)^2/2 = " + f(pred) +
                   " (ratio " + f(rates[i] / pred) + ")");
  }
  write_script(rec,
               "set xlabel 'K'\nset ylabel 'D'\n"
               "plot 'rate_vs_K.csv' skip 1 using 1:2 with points pt 7 title 'D', "
               "'' skip 1 using 1:3 with lines title '(eps K)^2/2'\n");
}

void fig2a(RunRecorder& rec, Checks& chk, int jobs) {
  const std::vector<double> ls{0, 1.5, 2, 5};
  std::vector<SimConfig> configs;
  for (double l : ls) configs.push_back(recipe_config(10, l, 1000));
  const auto runs = run_otoc_batch(configs, jobs);
  std::string plot = "set xlabel 't'\nset ylabel 'C'\nset logscale xy\nplot ";
  for (std::size_t i = 0; i < ls.size(); ++i) {
    write_series_csv(rec.output(series_name("lambda", ls[i])), runs[i].series);
    plot += "'" + series_name("lambda", ls[i]) + "' skip 1 using 1:3 with lines title 'lambda=" + f(ls[i]) + "', ";
  }
  plot += "x*(1e-5*10)**2/2 dt 2 title '(eps K)^2 t/2'\n";
  write_script(rec, plot);
  const auto f0 = extract_features(runs[0].series);
  const auto f5 = extract_features(runs[3].series);
  chk.expect(classify(f0) > 0.9, "lambda=0: rho " + f(classify(f0)) + " > 0.9");
  chk.expect(f5.doubling_ratio < 1.2, "lambda=5: doubling ratio " + f(f5.doubling_ratio) + " < 1.2 (saturation)");
  chk.expect(classify(f5) < 0.1, "lambda=5: rho " + f(classify(f5)) + " < 0.1");
}

void fig2b(RunRecorder& rec, Checks& chk, int jobs) {
  const std::vector<double> ls{2, 5};
  const std::vector<double> target{14, 4.5};
  std::vector<SimConfig> configs;
  for (double v : ls) configs.push_back(recipe_config(10, v, 1000));
  const auto runs = run_otoc_batch(configs, jobs, {1000});
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const auto d = momentum_distribution(runs[i].snapshots.at(1000));
    write_distribution_csv(rec.output("dist_lambda" + f(ls[i]) + ".csv"), d);
    const auto fit = fit_exponential_profile(d);
    chk.expect(std::abs(fit.xi_or_sigma / target[i] - 1.0) <= 0.3,
               "lambda=" + f(ls[i]) + ": xi = " + f(fit.xi_or_sigma) + " within 30% of " + f(target[i]));
  }
  write_script(rec,
               "set xlabel 'p'\nset ylabel '|psi(p)|^2'\nset logscale y\nset yrange [1e-25:1]\n"
               "plot 'dist_lambda2.csv' skip 1 with points title 'lambda=2', "
               "'dist_lambda5.csv' skip 1 with points title 'lambda=5'\n");
}

void fig3a(RunRecorder& rec, Checks& chk, int jobs) {
  const std::vector<double> ls{0, 0.3, 0.5, 1, 1.5, 2};
  std::vector<SimConfig> configs;
  for (double l : ls) configs.push_back(recipe_config(10, l, 1000));
  const auto runs = run_otoc_batch(configs, jobs);
  std::vector<double> mu(ls.size());
  std::ofstream csv(rec.output("mu_vs_lambda.csv"));
  csv << "lambda,mu,r_squared\n";
  for (std::size_t i = 0; i < ls.size(); ++i) {
    write_series_csv(rec.output(series_name("lambda", ls[i])), runs[i].series);
    const auto fit = fit_norm_growth(runs[i].series);
    mu[i] = fit.mu;
    csv << fmt15(ls[i]) << ',' << fmt15(fit.mu) << ',' << fmt15(fit.r_squared) << '\n';
  }
  for (std::size_t i = 0; i < 3; ++i)
    chk.expect(mu[i] < 1e-4, "lambda=" + f(ls[i]) + ": mu = " + f(mu[i]) + " < 1e-4");
  chk.expect(mu[3] < mu[4] && mu[4] < mu[5], "mu increasing over lambda = 1, 1.5, 2 (" + f(mu[3]) + ", " +
                                                  f(mu[4]) + ", " + f(mu[5]) + ")");
  const LinearFit lin = fit_line(std::vector<double>{1, 1.5, 2}, std::vector<double>{mu[3], mu[4], mu[5]});
  chk.expect(lin.r_squared > 0.9, "linear mu(lambda) on the growing branch: r^2 = " + f(lin.r_squared) + " > 0.9");
  write_script(rec,
               "set xlabel 't'\nset ylabel 'ln N'\nplot for [l in '0 0.3 0.5 1 1.5 2'] "
               "'series_lambda'.l.'.csv' skip 1 using 1:4 with lines title 'lambda='.l\n");
}

void fig3c(RunRecorder& rec, Checks& chk, int jobs) {
  SimConfig base = recipe_config(10, 0, 1000);
  base.lattice = MomentumLattice(8192, 2.89);
  const std::vector<double> hbars{0.5, 1.5, 2.89};
  const auto lambdas = linspace(0.0, 0.2, 21);
  const auto scan = norm_scan(base, hbars, lambdas, jobs);
  std::ofstream csv(rec.output("mean_norm.csv"));
  csv << "hbar,lambda,log_mean_norm,mu\n";
  for (const auto& e : scan)
    csv << fmt15(e.hbar) << ',' << fmt15(e.lambda) << ',' << fmt15(e.log_mean_norm) << ',' << fmt15(e.fit.mu) << '\n';
  std::map<double, std::optional<double>> lc;
  for (double h : hbars) {
    lc[h] = estimate_lambda_c(scan, h);
    std::cout << "hbar = " << h << "  lambda_c = " << (lc[h] ? f(*lc[h]) : std::string("not reached")) << "\n";
  }
  const bool ok = lc[0.5] && lc[2.89] && *lc[0.5] < *lc[2.89];
  chk.expect(ok, "lambda_c(hbar=0.5) < lambda_c(hbar=2.89)");
  write_script(rec,
               "set xlabel 'lambda'\nset ylabel 'ln mean N'\n"
               "plot for [h in '0.5 1.5 2.89'] 'mean_norm.csv' skip 1 using ($1==h+0 ? $2 : 1/0):3 "
               "with linespoints title 'hbar='.h\n");
}

void fig4(RunRecorder& rec, Checks& chk, bool profiles) {
  SimConfig c = recipe_config(10, 5, 200);
  const FidelityAnalysis a = fidelity_analysis(c, 200, 1024);
  const auto& best = a.fidelity.best;
  const double top = a.spectrum.eps_i(a.top_bulk);
  if (!profiles) {
    std::ofstream csv(rec.output("fidelity_vs_eps_i.csv"));
    csv << "eps_i,fidelity\n";
    for (const auto& o : a.fidelity.overlaps) csv << fmt15(o.eps_i) << ',' << fmt15(o.fidelity) << '\n';
    write_script(rec,
                 "set xlabel 'eps_i'\nset ylabel 'F'\n"
                 "plot 'fidelity_vs_eps_i.csv' skip 1 using 1:2 with points pt 7 notitle\n");
    std::size_t above = 0;
    for (const auto& o : a.fidelity.overlaps) above += o.fidelity > 0.5 ? 1 : 0;
    chk.expect(best.fidelity > 0.99, "best fidelity " + f(best.fidelity) + " > 0.99 at eps_i = " + f(best.eps_i));
    chk.expect(above == 1, "single dominant peak (" + std::to_string(above) + " states with F > 0.5)");
    chk.expect(in_top_band(a.spectrum, best.index),
               "best state lies in the top eps_i band (top bulk eps_i = " + f(top) + ")");
    chk.expect(std::abs(top / 2.454 - 1.0) <= 0.1, "top eps_i " + f(top) + " within 10% of 2.454");
    return;
  }
  const auto ds = momentum_distribution(a.state);
  const auto de = momentum_distribution(eigenstate_wavefunction(a.spectrum, best.index, a.state.lattice));
  write_distribution_csv(rec.output("state_dist.csv"), ds);
  write_distribution_csv(rec.output("eigenstate_dist.csv"), de);
  const double xs = fit_exponential_profile(ds).xi_or_sigma;
  const double xe = fit_exponential_profile(de).xi_or_sigma;
  chk.expect(std::abs(xs / 3.4 - 1.0) <= 0.3, "evolved state xi = " + f(xs) + " within 30% of 3.4");
  chk.expect(std::abs(xe / 3.4 - 1.0) <= 0.3, "quasi-eigenstate xi = " + f(xe) + " within 30% of 3.4");
  chk.expect(std::abs(xs - xe) <= 0.2 * std::max(xs, xe), "xi values agree within 20%");
  write_script(rec,
               "set xlabel 'p'\nset ylabel '|psi(p)|^2'\nset logscale y\nset yrange [1e-25:1]\n"
               "plot 'state_dist.csv' skip 1 with points title 'psi(t=200)', "
               "'eigenstate_dist.csv' skip 1 with lines title 'quasi-eigenstate'\n");
}

}  // namespace

int reproduce(const std::string& figure, const std::string& out_dir, int jobs, const std::vector<std::string>& args) {
  RunRecorder rec(make_run_dir(out_dir, "reproduce-" + figure), "reproduce", args);
  Checks chk;
  if (figure == "fig1a") fig1a(rec, chk, jobs);
  else if (figure == "fig1b") fig1b(rec, chk, jobs);
  else if (figure == "fig1d") fig1d(rec, chk, jobs);
  else if (figure == "fig2a") fig2a(rec, chk, jobs);
  else if (figure == "fig2b") fig2b(rec, chk, jobs);
  else if (figure == "fig3a") fig3a(rec, chk, jobs);
  else if (figure == "fig3c") fig3c(rec, chk, jobs);
  else if (figure == "fig4a") fig4(rec, chk, false);
  else if (figure == "fig4b") fig4(rec, chk, true);
  else throw ConfigError("unknown figure id " + figure);
  rec.add("checks", chk.results());
  rec.finish();
  std::cout << "wrote " << rec.dir().string() << "\n";
  return chk.exit_code();
}

}  // namespace nqkr::cli
