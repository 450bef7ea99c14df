/* Copyright 2026 The ppi-carbon Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
// Batch front end: solve, filter, simulate and analyse scenarios read from a
// TOML file, writing CSV and JSON artifacts into an output directory.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "ppi/analysis.hpp"
#include "ppi/config.hpp"
#include "ppi/errors.hpp"
#include "ppi/filtering.hpp"
#include "ppi/io.hpp"
#include "ppi/policy.hpp"
#include "ppi/riccati.hpp"
#include "ppi/simulator.hpp"

namespace fs = std::filesystem;
using namespace ppi;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<double> dt;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::string scenario;
  std::optional<int> table;
  std::optional<int> figure;
  std::optional<unsigned> workers;
};

/// Files written by the current command, removed again if the command fails.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  std::ofstream open(const std::string& name) {
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      createdDir_ = true;
    }
    const fs::path p = dir_ / name;
    written_.push_back(p);
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ValidationError("ValidationError", "cannot write " + p.string());
    return os;
  }

  void rollback() {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    if (createdDir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

  const std::vector<fs::path>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool createdDir_ = false;
};

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

class Session {
 public:
  Session(const Options& opt)
      : opt_(opt), cfg_(load_config(opt.config)), out_(opt.out.value_or(cfg_.outputDir)) {}

  Outputs& outputs() { return out_; }

  MarketModel model() const {
    return opt_.scenario.empty() ? cfg_.model : cfg_.scenario_model(opt_.scenario);
  }

  MarketModel model(const std::string& scenario) const { return cfg_.scenario_model(scenario); }

  PreferenceSpec preference() const {
    double delta = 0.7, eps = 0.0;
    if (!cfg_.preferences.empty()) std::tie(delta, eps) = cfg_.preferences.front();
    return PreferenceSpec::crra(opt_.delta.value_or(delta), opt_.epsilon.value_or(eps));
  }

  InfoMode mode() const {
    return opt_.mode ? parse_info_mode(*opt_.mode) : cfg_.simulation.infoModes.front();
  }

  std::vector<double> delta_axis() const {
    if (opt_.delta) return {*opt_.delta};
    return cfg_.deltaGrid.empty() ? std::vector<double>{0.7, 1.0, 3.0} : cfg_.deltaGrid;
  }

  std::vector<double> epsilon_axis() const {
    if (opt_.epsilon) return {*opt_.epsilon};
    return cfg_.epsilonGrid.empty() ? std::vector<double>{0.0, 1.0} : cfg_.epsilonGrid;
  }

  SimConfig sim(const PreferenceSpec& pref, InfoMode mode) const {
    const auto& s = cfg_.simulation;
    SimConfig c;
    c.T = s.T;
    c.dt = opt_.dt.value_or(s.dt);
    c.nPaths = opt_.paths.value_or(s.nPaths);
    c.seed = opt_.seed.value_or(s.seed);
    c.infoMode = mode;
    c.pref = pref;
    c.V0 = s.V0;
    c.PL = s.PL;
    c.odeSteps = s.odeSteps;
    c.workers = opt_.workers.value_or(s.workers);
    return c;
  }

  const ScenarioConfig& config() const { return cfg_; }
  const Options& options() const { return opt_; }

 private:
  Options opt_;
  ScenarioConfig cfg_;
  Outputs out_;
};

void write_variance_csv(const FilterVarianceCurve& v, std::ostream& os) {
  const Eigen::Index n = v.Pbar.empty() ? 0 : v.Pbar.front().size();
  os << "t,P";
  for (Eigen::Index i = 0; i < n; ++i) os << ",Pbar_" << i + 1;
  os << '\n';
  for (std::size_t j = 0; j < v.size(); ++j) {
    os << fmt17(v.t[j]) << ',' << fmt17(v.P[j]);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt17(v.Pbar[j](i));
    os << '\n';
  }
}

int cmd_solve(Session& s) {
  const Market market(s.model());
  const auto pref = s.preference();
  const auto& sim = s.config().simulation;
  const auto sol = solve_problem(market, pref, sim.T, sim.odeSteps);
  {
    auto os = s.outputs().open("filter_variance.csv");
    write_variance_csv(sol.variance, os);
  }
  if (pref.is_log()) {
    const OdeGrid grid = tabulate_log(*sol.log, sim.odeSteps);
    auto os = s.outputs().open("solution_log.csv");
    write_grid_csv(grid, os);
    auto ps = s.outputs().open("solution_log_partial.csv");
    ps << "t,f,g,h\n";
    for (std::size_t j = 0; j < grid.size(); ++j) {
      ps << fmt17(grid.t[j]) << ',' << fmt17(grid.f[j]) << ',' << fmt17(grid.g[j]) << ','
         << fmt17(sol.log->h_tilde(grid.t[j], sol.variance)) << '\n';
    }
  } else {
    auto fs1 = s.outputs().open("solution_full.csv");
    write_grid_csv(*sol.full, fs1);
    auto fs2 = s.outputs().open("solution_partial.csv");
    write_grid_csv(*sol.partial, fs2);
  }
  return 0;
}

int cmd_simulate(Session& s) {
  const Market market(s.model());
  const auto out = run_monte_carlo(market, s.sim(s.preference(), s.mode()));
  {
    auto os = s.outputs().open("paths.csv");
    write_paths_csv(out, os);
  }
  auto js = s.outputs().open("stats.json");
  js << stats_json(out) << '\n';
  std::cout << stats_json(out) << '\n';
  return 0;
}

void filter_demo(Session& s, const std::string& name) {
  const Market market(s.model());
  const auto cfg = s.sim(s.preference(), InfoMode::Partial);
  const int steps = cfg.steps();
  const auto variance = solve_filter_variance(market, cfg.T, 2 * cfg.odeSteps);
  const DriverPath drivers = simulate_drivers(market, cfg.T, cfg.dt, cfg.seed, 0);
  const Eigen::MatrixXd returns = drivers.logS.rightCols(steps) - drivers.logS.leftCols(steps);
  const auto gamma = filter_run(returns, cfg.dt, market, variance);

  auto os = s.outputs().open(name);
  os << "t,Y,Gamma,P\n";
  double seFilter = 0.0, sePrior = 0.0;
  for (int j = 0; j <= steps; ++j) {
    const double t = cfg.dt * j;
    os << fmt17(t) << ',' << fmt17(drivers.Y[j]) << ',' << fmt17(gamma[j]) << ','
       << fmt17(variance.P_at(t)) << '\n';
    seFilter += std::pow(drivers.Y[j] - gamma[j], 2);
    sePrior += std::pow(drivers.Y[j] - market.model.gamma0, 2);
  }
  std::cout << "rmse_filter " << fmt17(std::sqrt(seFilter / (steps + 1))) << "\n"
            << "rmse_prior_mean " << fmt17(std::sqrt(sePrior / (steps + 1))) << "\n";
}

struct CurvePoint {
  double delta, epsilon, loss, efficiency;
};

std::vector<CurvePoint> loss_efficiency_curve(Session& s) {
  const Market market(s.model());
  const auto& sim = s.config().simulation;
  const double c0 = 1.0;
  std::vector<CurvePoint> pts;
  for (double delta : s.delta_axis()) {
    for (double eps : s.epsilon_axis()) {
      const auto sol = solve_problem(market, PreferenceSpec::crra(delta, eps), sim.T, sim.odeSteps);
      pts.push_back({delta, eps, loss_of_utility(0.0, c0, market.model.gamma0, market, sol),
                     efficiency(market, sol)});
    }
  }
  return pts;
}

int cmd_loss_curve(Session& s) {
  auto os = s.outputs().open("loss_curve.csv");
  os << "delta,epsilon,loss\n";
  for (const auto& p : loss_efficiency_curve(s)) {
    os << fmt17(p.delta) << ',' << fmt17(p.epsilon) << ',' << fmt17(p.loss) << '\n';
  }
  return 0;
}

int cmd_efficiency_curve(Session& s) {
  auto os = s.outputs().open("efficiency_curve.csv");
  os << "delta,epsilon,efficiency\n";
  for (const auto& p : loss_efficiency_curve(s)) {
    os << fmt17(p.delta) << ',' << fmt17(p.epsilon) << ',' << fmt17(p.efficiency) << '\n';
  }
  return 0;
}

int cmd_admissibility(Session& s) {
  const Market market(s.model());
  const auto& sim = s.config().simulation;
  const auto sol = solve_problem(market, s.preference(), sim.T, sim.odeSteps);
  const std::string js = admissibility_json(admissibility_report(market, sol));
  auto os = s.outputs().open("admissibility.json");
  os << js << '\n';
  std::cout << js << '\n';
  return 0;
}

void write_stat_row(std::ostream& os, const std::string& head, const std::vector<SimOutput>& runs,
                    double SummaryStats::*stat, double SummaryErrors::*err) {
  os << head;
  for (const auto& r : runs) os << ',' << fmt17(r.stats.*stat) << ',' << fmt17(r.errors.*err);
  os << '\n';
}

void write_stat_block(std::ostream& os, const std::string& prefix,
                      const std::vector<SimOutput>& runs) {
  write_stat_row(os, prefix + "mean", runs, &SummaryStats::mean, &SummaryErrors::mean);
  write_stat_row(os, prefix + "variance", runs, &SummaryStats::variance, &SummaryErrors::variance);
  write_stat_row(os, prefix + "q05", runs, &SummaryStats::q05, &SummaryErrors::q05);
  write_stat_row(os, prefix + "q50", runs, &SummaryStats::q50, &SummaryErrors::q50);
  write_stat_row(os, prefix + "q90", runs, &SummaryStats::q90, &SummaryErrors::q90);
}

void reproduce_table3(Session& s) {
  const auto& cfg = s.config();
  if (cfg.scenarios.empty()) throw ValidationError("ValidationError", "no scenarios configured");
  std::vector<double> deltas, epsilons;
  for (const auto& [d, e] : cfg.preferences) {
    if (std::find(deltas.begin(), deltas.end(), d) == deltas.end()) deltas.push_back(d);
    if (std::find(epsilons.begin(), epsilons.end(), e) == epsilons.end()) epsilons.push_back(e);
  }
  auto os = s.outputs().open("table3.csv");
  os << "delta,statistic";
  for (const auto& sc : cfg.scenarios) {
    for (double e : epsilons) {
      const std::string col = sc.name + "_eps" + label(e);
      os << ',' << col << ',' << col << "_se";
    }
  }
  os << '\n';
  for (double d : deltas) {
    std::vector<SimOutput> runs;
    for (const auto& sc : cfg.scenarios) {
      const Market market(s.model(sc.name));
      for (double e : epsilons) {
        runs.push_back(run_monte_carlo(market, s.sim(PreferenceSpec::crra(d, e), InfoMode::Partial)));
        std::cerr << "table3 delta=" << label(d) << " " << sc.name << " eps=" << label(e)
                  << " mean=" << fmt17(runs.back().stats.mean) << "\n";
      }
    }
    write_stat_block(os, fmt17(d) + ",", runs);
  }
}

void reproduce_table4(Session& s) {
  const std::string scenario = s.options().scenario.empty() ? "S3" : s.options().scenario;
  const Market market(s.model(scenario));
  const auto pref = PreferenceSpec::crra(s.options().delta.value_or(0.7),
                                         s.options().epsilon.value_or(1.0));
  std::vector<SimOutput> runs;
  for (InfoMode m : {InfoMode::Full, InfoMode::Partial}) {
    runs.push_back(run_monte_carlo(market, s.sim(pref, m)));
  }
  auto os = s.outputs().open("table4.csv");
  os << "statistic,full,full_se,partial,partial_se\n";
  write_stat_block(os, "", runs);
}

double initial_cushion_ratio(const SimConfig& c, double r) {
  const double F0 = c.guarantee() * std::exp(-r * c.T);
  return (c.V0 - F0) / c.V0;
}

void reproduce_figure(Session& s, int figure) {
  const auto& cfg = s.config();
  const auto& sim = cfg.simulation;
  const std::string name = "figure" + std::to_string(figure) + ".csv";
  switch (figure) {
    case 1:
      filter_demo(s, name);
      return;
    case 2: {
      const Market market(s.model());
      const double ratio = initial_cushion_ratio(s.sim(s.preference(), InfoMode::Partial), market.model.r);
      auto os = s.outputs().open(name);
      os << "delta,epsilon,asset,exposure\n";
      for (const auto& [d, e] : cfg.preferences) {
        const auto sol = solve_problem(market, PreferenceSpec::crra(d, e), sim.T, sim.odeSteps);
        const auto aff = affine_control(0.0, market, sol, InfoMode::Partial);
        const Eigen::VectorXd theta = aff.slope * market.model.gamma0 + aff.intercept;
        for (int i = 0; i < market.model.n; ++i) {
          os << fmt17(d) << ',' << fmt17(e) << ',' << i + 1 << ',' << fmt17(theta(i) * ratio)
             << '\n';
        }
      }
      return;
    }
    case 3: {
      const Market market(s.model());
      const double ratio = initial_cushion_ratio(s.sim(s.preference(), InfoMode::Partial), market.model.r);
      auto os = s.outputs().open(name);
      os << "delta,epsilon,multiplier,risk_free_exposure\n";
      for (double d : s.delta_axis()) {
        for (double e : s.epsilon_axis()) {
          const auto sol = solve_problem(market, PreferenceSpec::crra(d, e), sim.T, sim.odeSteps);
          const auto aff = affine_control(0.0, market, sol, InfoMode::Partial);
          const double m = (aff.slope * market.model.gamma0 + aff.intercept).sum();
          os << fmt17(d) << ',' << fmt17(e) << ',' << fmt17(m) << ',' << fmt17(1.0 - m * ratio)
             << '\n';
        }
      }
      return;
    }
    case 4: {
      const Market market(s.model());
      const auto pref = PreferenceSpec::crra(s.options().delta.value_or(1.0),
                                             s.options().epsilon.value_or(1.0));
      const auto c = s.sim(pref, InfoMode::Partial);
      const auto sol = solve_problem(market, pref, c.T, c.odeSteps);
      const auto tr = trace_path(market, c, &sol, 0);
      auto os = s.outputs().open(name);
      os << "t";
      for (int i = 0; i < market.model.n; ++i) os << ",exposure_" << i + 1;
      os << '\n';
      for (Eigen::Index j = 0; j < tr.theta.cols(); ++j) {
        const double ratio = std::max(tr.V[j] - tr.F[j], 0.0) / tr.V[j];
        os << fmt17(tr.t[j]);
        for (int i = 0; i < market.model.n; ++i) os << ',' << fmt17(tr.theta(i, j) * ratio);
        os << '\n';
      }
      return;
    }
    case 5: {
      const Market market(s.model());
      const double d = s.options().delta.value_or(1.0);
      std::vector<std::string> cols;
      std::vector<PathTrace> traces;
      for (double e : {0.0, 1.0}) {
        const auto pref = PreferenceSpec::crra(d, e);
        const auto sol = solve_problem(market, pref, sim.T, sim.odeSteps);
        for (InfoMode m : {InfoMode::Full, InfoMode::Partial}) {
          traces.push_back(trace_path(market, s.sim(pref, m), &sol, 0));
          cols.push_back("multiplier_" + info_mode_name(m) + "_eps" + label(e));
        }
      }
      auto os = s.outputs().open(name);
      os << "t";
      for (const auto& c : cols) os << ',' << c;
      os << '\n';
      for (Eigen::Index j = 0; j < traces.front().theta.cols(); ++j) {
        os << fmt17(traces.front().t[j]);
        for (const auto& tr : traces) os << ',' << fmt17(tr.theta.col(j).sum());
        os << '\n';
      }
      return;
    }
    case 6: {
      auto os = s.outputs().open(name);
      os << "delta,epsilon,loss,efficiency\n";
      for (const auto& p : loss_efficiency_curve(s)) {
        os << fmt17(p.delta) << ',' << fmt17(p.epsilon) << ',' << fmt17(p.loss) << ','
           << fmt17(p.efficiency) << '\n';
      }
      return;
    }
    default:
      throw ValidationError("ValidationError", "figure must be between 1 and 6");
  }
}

int cmd_reproduce(Session& s) {
  const auto& o = s.options();
  if (o.table.has_value() == o.figure.has_value()) {
    throw ValidationError("ValidationError", "give exactly one of --table or --figure");
  }
  if (o.table) {
    if (*o.table == 3) {
      reproduce_table3(s);
    } else if (*o.table == 4) {
      reproduce_table4(s);
    } else {
      throw ValidationError("ValidationError", "table must be 3 or 4");
    }
  } else {
    reproduce_figure(s, *o.figure);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carbon-penalised portfolio insurance under a latent factor"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config, "Scenario configuration (TOML)")->required();
  app.add_option("--seed", opt.seed, "Run seed");
  app.add_option("--paths", opt.paths, "Number of Monte Carlo paths")->check(CLI::PositiveNumber);
  app.add_option("--dt", opt.dt, "Simulation time step in years")->check(CLI::PositiveNumber);
  app.add_option("--out", opt.out, "Output directory");
  app.add_option("--mode", opt.mode, "Information mode")->check(CLI::IsMember({"full", "partial"}));
  app.add_option("--delta", opt.delta, "Relative risk aversion (1 selects log utility)");
  app.add_option("--epsilon", opt.epsilon, "Carbon aversion");
  app.add_option("--scenario", opt.scenario, "Named drift scenario from the configuration");
  app.add_option("--workers", opt.workers, "Simulation threads (0 = all cores)");

  std::map<std::string, int (*)(Session&)> handlers{
      {"solve", cmd_solve},
      {"simulate", cmd_simulate},
      {"filter-demo", [](Session& s) { filter_demo(s, "filter_demo.csv"); return 0; }},
      {"loss-curve", cmd_loss_curve},
      {"efficiency-curve", cmd_efficiency_curve},
      {"admissibility", cmd_admissibility},
      {"reproduce", cmd_reproduce},
  };
  const std::map<std::string, std::string> help{
      {"solve", "Solve the coefficient equations and write them as CSV"},
      {"simulate", "Monte Carlo simulation of the optimal strategy"},
      {"filter-demo", "One factor path with its filtered estimate"},
      {"loss-curve", "Loss of utility at time 0 over the preference grid"},
      {"efficiency-curve", "Efficiency over the preference grid"},
      {"admissibility", "Sufficient-condition report as JSON"},
      {"reproduce", "Reproduce a table (--table 3|4) or figure data (--figure 1..6)"},
  };
  for (const auto& [name, text] : help) {
    auto* sub = app.add_subcommand(name, text);
    if (name == "reproduce") {
      sub->add_option("--table", opt.table, "Table number");
      sub->add_option("--figure", opt.figure, "Figure number");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<Session> session;
  try {
    session.emplace(opt);
    return handlers.at(command)(*session);
  } catch (const Error& e) {
    if (session) session->outputs().rollback();
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Validation ? kExitValidation : kExitNumerical;
  } catch (const std::exception& e) {
    if (session) session->outputs().rollback();
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
