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
#include "ppi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "ppi/errors.hpp"
#include "ppi/io.hpp"

namespace ppi {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Per-(market, dt) constants of the driver recursion.
struct DriverKernel {
  int n = 0;
  int steps = 0;
  double sqdt = 0.0;
  Eigen::MatrixXd L;
  Eigen::VectorXd drift;  // (b - sigma^2 / 2) dt
  Eigen::VectorXd adt;
  Eigen::VectorXd sigma;
  double sigmaY = 0.0;
  double decay = 1.0;     // e^{lambda dt}
  double shift = 0.0;     // beta (e^{lambda dt} - 1) / lambda
  double noiseScale = 1.0;

  DriverKernel(const Market& market, double T, double dt) {
    const auto& m = market.model;
    n = m.n;
    steps = static_cast<int>(std::llround(T / dt));
    sqdt = std::sqrt(dt);
    L = market.tm.L;
    drift = (m.b - 0.5 * m.sigma.array().square().matrix()) * dt;
    adt = m.a * dt;
    sigma = m.sigma;
    sigmaY = m.sigmaY;
    const double ld = m.lambda * dt;
    decay = std::exp(ld);
    if (std::abs(m.lambda) > 1e-14) {
      shift = m.beta * std::expm1(ld) / m.lambda;
      // Stretch the shared Euler increment so the factor variance per step is exact.
      noiseScale = std::sqrt(std::expm1(2.0 * ld) / (2.0 * ld));
    } else {
      shift = m.beta * dt;
    }
  }
};

void run_drivers(DriverPath& out, const DriverKernel& k, double gamma0, double p0,
                 std::uint64_t seed, std::uint64_t pathIndex, std::optional<double> pinnedY0) {
  std::mt19937_64 rng(path_seed(seed, pathIndex));
  std::normal_distribution<double> normal;

  out.Y.resize(k.steps + 1);
  out.logS.resize(k.n, k.steps + 1);
  out.logS.col(0).setZero();

  const double z0 = normal(rng);
  double y = pinnedY0 ? *pinnedY0 : gamma0 + std::sqrt(p0) * z0;
  out.Y[0] = y;

  const int dim = k.n + 1;
  double z[64];
  std::vector<double> zbuf;
  double* zp = z;
  if (dim > 64) {
    zbuf.resize(dim);
    zp = zbuf.data();
  }

  for (int j = 0; j < k.steps; ++j) {
    for (int p = 0; p < dim; ++p) zp[p] = normal(rng) * k.sqdt;
    const double* prev = out.logS.data() + static_cast<Eigen::Index>(j) * k.n;
    double* next = out.logS.data() + static_cast<Eigen::Index>(j + 1) * k.n;
    for (int i = 0; i < k.n; ++i) {
      double w = 0.0;
      for (int p = 0; p <= i; ++p) w += k.L(i, p) * zp[p];
      next[i] = prev[i] + k.adt[i] * y + k.drift[i] + k.sigma[i] * w;
    }
    double wy = 0.0;
    for (int p = 0; p < dim; ++p) wy += k.L(k.n, p) * zp[p];
    y = y * k.decay + k.shift + k.noiseScale * k.sigmaY * wy;
    out.Y[j + 1] = y;
  }
}

}  // namespace

int SimConfig::steps() const { return static_cast<int>(std::llround(T / dt)); }

void SimConfig::validate(const MarketModel& model) const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ValidationError("ValidationError", msg);
  };
  require(std::isfinite(T) && T > 0.0, "T must be positive");
  require(std::isfinite(dt) && dt > 0.0 && dt <= T, "dt must lie in (0, T]");
  require(std::abs(steps() * dt - T) <= 1e-12 * std::max(1.0, T), "dt must divide T");
  require(nPaths >= 1, "nPaths must be at least 1");
  require(PL > 0.0 && PL <= 1.0, "PL must lie in (0, 1]");
  require(V0 > guarantee() * std::exp(-model.r * T), "initial cushion must be positive");
  require(std::isfinite(controlScale), "controlScale must be finite");
  require(odeSteps >= 100, "odeSteps must be at least 100");
  pref.validate();
  if (controlSource == ControlSource::FixedTheta) {
    require(fixedTheta.size() == model.n, "fixed theta must have n entries");
  }
  if (controlSource == ControlSource::FixedMultiplier) {
    require(fixedWeights.size() == model.n, "fixed weights must have n entries");
  }
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t pathIndex) {
  return splitmix64(splitmix64(seed) ^ splitmix64(pathIndex + 0x632BE59BD9B4E019ULL));
}

DriverPath simulate_drivers(const Market& market, double T, double dt, std::uint64_t seed,
                            std::uint64_t pathIndex, std::optional<double> pinnedY0) {
  DriverPath out;
  simulate_drivers(out, market, T, dt, seed, pathIndex, pinnedY0);
  return out;
}

void simulate_drivers(DriverPath& out, const Market& market, double T, double dt,
                      std::uint64_t seed, std::uint64_t pathIndex,
                      std::optional<double> pinnedY0) {
  const DriverKernel k(market, T, dt);
  run_drivers(out, k, market.model.gamma0, market.model.p0, seed, pathIndex, pinnedY0);
}

ControlSchedule::ControlSchedule(const Market& market, const SimConfig& config,
                                 const SolvedProblem* sol)
    : n_(market.model.n) {
  const int steps = config.steps();
  slope_ = Eigen::MatrixXd::Zero(n_, steps);
  intercept_ = Eigen::MatrixXd::Zero(n_, steps);
  switch (config.controlSource) {
    case ControlSource::FixedTheta:
      intercept_.colwise() = config.fixedTheta;
      break;
    case ControlSource::FixedMultiplier:
      intercept_.colwise() = config.fixedMultiplier * config.fixedWeights;
      break;
    case ControlSource::Optimal:
      if (sol == nullptr) throw ValidationError("ValidationError", "optimal control needs a solution");
      for (int j = 0; j < steps; ++j) {
        const auto ac = affine_control(config.dt * j, market, *sol, config.infoMode);
        slope_.col(j) = config.controlScale * ac.slope;
        intercept_.col(j) = config.controlScale * ac.intercept;
      }
      break;
  }
}

void ControlSchedule::theta(int j, double x, double* out) const {
  const double* s = slope_.data() + static_cast<Eigen::Index>(j) * n_;
  const double* c = intercept_.data() + static_cast<Eigen::Index>(j) * n_;
  for (int i = 0; i < n_; ++i) out[i] = s[i] * x + c[i];
}

PathRecord evolve_ppi(const DriverPath& drivers, const SimConfig& config, const Market& market,
                      const ControlSchedule& controls, const FilterSchedule* filter,
                      PathTrace* trace) {
  const auto& m = market.model;
  const int n = m.n;
  const int steps = config.steps();
  if (drivers.logS.cols() != steps + 1 || static_cast<int>(drivers.Y.size()) != steps + 1) {
    throw ValidationError("ValidationError", "driver path does not match the configuration grid");
  }
  const bool partial = config.infoMode == InfoMode::Partial;
  if (partial && config.controlSource == ControlSource::Optimal && filter == nullptr) {
    throw ValidationError("ValidationError", "partial information needs the filter");
  }

  const double dt = config.dt;
  const double r = m.r;
  const double G = config.guarantee();
  const double growth = std::exp(r * dt);
  const Eigen::VectorXd pen =
      config.pref.carbon_mask(n, m.k).cwiseProduct(m.sigma.cwiseAbs2());
  const Eigen::MatrixXd& M = market.cov;

  double V = config.V0;
  double F = G * std::exp(-r * config.T);
  double gamma = m.gamma0;
  double penalty = 0.0;
  double logShadow = std::log(V - F);
  bool absorbed = false;
  double tau = config.T;

  double theta[64], ret[64];
  std::vector<double> big;
  double* th = theta;
  double* rt = ret;
  if (n > 64) {
    big.resize(2 * n);
    th = big.data();
    rt = big.data() + n;
  }

  if (trace != nullptr) {
    *trace = PathTrace{};
    trace->theta.resize(n, steps);
  }
  auto record = [&](int j, double x) {
    if (trace == nullptr) return;
    trace->t.push_back(dt * j);
    trace->V.push_back(V);
    trace->F.push_back(F);
    trace->factor.push_back(drivers.Y[j]);
    trace->state.push_back(x);
  };

  for (int j = 0; j < steps; ++j) {
    const double x = partial ? gamma : drivers.Y[j];
    controls.theta(j, x, th);
    record(j, x);
    if (trace != nullptr) {
      for (int i = 0; i < n; ++i) trace->theta(i, j) = th[i];
    }
    const double* s0 = drivers.logS.data() + static_cast<Eigen::Index>(j) * n;
    const double* s1 = s0 + n;
    for (int i = 0; i < n; ++i) rt[i] = s1[i] - s0[i];

    double quadM = 0.0, quadPen = 0.0, lin = 0.0;
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int p = 0; p < n; ++p) row += M(i, p) * th[p];
      quadM += th[i] * row;
      quadPen += pen[i] * th[i] * th[i];
      lin += th[i] * (rt[i] + (0.5 * m.sigma[i] * m.sigma[i] - r) * dt);
    }
    logShadow += r * dt + lin - 0.5 * (quadM + quadPen) * dt;

    if (!absorbed) {
      // Rebalanced at the start of the step: cushion * theta_i in asset i, the rest riskless.
      const double C = V - F;
      double excess = 0.0;
      for (int i = 0; i < n; ++i) excess += th[i] * (std::exp(rt[i]) - growth);
      V = V * growth + C * excess;
      penalty += quadPen * dt;
    } else {
      V *= growth;
    }
    F = G * std::exp(-r * (config.T - dt * (j + 1)));
    if (filter != nullptr) gamma = filter->advance(j, gamma, rt);
    if (!absorbed && V <= F) {
      absorbed = true;
      tau = dt * (j + 1);
    }
  }

  record(steps, partial ? gamma : drivers.Y[steps]);

  PathRecord rec;
  rec.terminalV = V;
  rec.terminalCushion = V - G;
  rec.terminalPenalisedCushion = rec.terminalCushion * std::exp(-0.5 * penalty);
  rec.logShadowCushion = logShadow;
  rec.absorbed = absorbed;
  rec.tau = tau;
  rec.breach = absorbed ? std::max(G - V, 0.0) : 0.0;
  return rec;
}

std::vector<double> SimOutput::terminal_wealth() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.terminalV);
  return out;
}

SimOutput run_monte_carlo(const Market& market, const SimConfig& config) {
  config.validate(market.model);
  if (config.controlSource == ControlSource::Optimal ||
      config.infoMode == InfoMode::Partial) {
    const auto sol = solve_problem(market, config.pref, config.T, config.odeSteps);
    return run_monte_carlo(market, config, &sol);
  }
  return run_monte_carlo(market, config, nullptr);
}

SimOutput run_monte_carlo(const Market& market, const SimConfig& config, const SolvedProblem* sol) {
  config.validate(market.model);
  const int steps = config.steps();
  const ControlSchedule controls(market, config, sol);
  std::optional<FilterSchedule> filter;
  if (config.infoMode == InfoMode::Partial && sol != nullptr) {
    filter.emplace(market, sol->variance, config.dt, steps);
  }
  const DriverKernel kernel(market, config.T, config.dt);

  SimOutput out;
  out.config = config;
  out.samples.resize(config.nPaths);

  unsigned workers = config.workers != 0 ? config.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(config.nPaths)));

  std::exception_ptr failure;
  std::mutex failureMutex;
  auto work = [&](std::size_t begin, std::size_t end) {
    try {
      DriverPath buffer;
      for (std::size_t i = begin; i < end; ++i) {
        run_drivers(buffer, kernel, market.model.gamma0, market.model.p0, config.seed, i,
                    config.pinnedY0);
        out.samples[i] = evolve_ppi(buffer, config, market, controls, filter ? &*filter : nullptr);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failureMutex);
      if (!failure) failure = std::current_exception();
    }
  };

  const std::size_t chunk = (config.nPaths + workers - 1) / workers;
  if (workers == 1) {
    work(0, config.nPaths);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t b = std::min(config.nPaths, w * chunk);
      const std::size_t e = std::min(config.nPaths, b + chunk);
      pool.emplace_back(work, b, e);
    }
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  const auto wealth = out.terminal_wealth();
  out.stats = summary_stats(wealth);
  out.errors = summary_errors(wealth);
  return out;
}

PathTrace trace_path(const Market& market, const SimConfig& config, const SolvedProblem* sol,
                     std::uint64_t pathIndex) {
  config.validate(market.model);
  const ControlSchedule controls(market, config, sol);
  std::optional<FilterSchedule> filter;
  if (config.infoMode == InfoMode::Partial && sol != nullptr) {
    filter.emplace(market, sol->variance, config.dt, config.steps());
  }
  const DriverPath drivers =
      simulate_drivers(market, config.T, config.dt, config.seed, pathIndex, config.pinnedY0);
  PathTrace trace;
  evolve_ppi(drivers, config, market, controls, filter ? &*filter : nullptr, &trace);
  return trace;
}

void write_paths_csv(const SimOutput& out, std::ostream& os) {
  os << "path,terminal_wealth,terminal_cushion,penalised_cushion,log_shadow_cushion,absorbed,tau,"
        "breach\n";
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const auto& s = out.samples[i];
    os << i << ',' << fmt17(s.terminalV) << ',' << fmt17(s.terminalCushion) << ','
       << fmt17(s.terminalPenalisedCushion) << ',' << fmt17(s.logShadowCushion) << ','
       << (s.absorbed ? 1 : 0) << ',' << fmt17(s.tau) << ',' << fmt17(s.breach) << '\n';
  }
}

std::string stats_json(const SimOutput& out) {
  const auto& c = out.config;
  std::size_t absorbed = 0;
  double breach = 0.0;
  for (const auto& s : out.samples) {
    absorbed += s.absorbed ? 1 : 0;
    breach = std::max(breach, s.breach);
  }
  nlohmann::ordered_json j;
  j["config"] = {{"T", c.T},
                 {"dt", c.dt},
                 {"paths", c.nPaths},
                 {"seed", c.seed},
                 {"mode", c.infoMode == InfoMode::Full ? "full" : "partial"},
                 {"utility", c.pref.is_log() ? "log" : "crra"},
                 {"delta", c.pref.delta},
                 {"epsilon", c.pref.epsilon},
                 {"V0", c.V0},
                 {"PL", c.PL}};
  j["stats"] = {{"mean", out.stats.mean},
                {"variance", out.stats.variance},
                {"q05", out.stats.q05},
                {"q50", out.stats.q50},
                {"q90", out.stats.q90}};
  j["standard_errors"] = {{"mean", out.errors.mean},
                          {"variance", out.errors.variance},
                          {"q05", out.errors.q05},
                          {"q50", out.errors.q50},
                          {"q90", out.errors.q90}};
  j["floor"] = {{"absorbed_paths", absorbed}, {"max_breach", breach}};
  return j.dump(2);
}

}  // namespace ppi
