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
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppi/filtering.hpp"
#include "ppi/model.hpp"
#include "ppi/policy.hpp"
#include "ppi/stats.hpp"

namespace ppi {

enum class ControlSource { Optimal, FixedTheta, FixedMultiplier };

/// Description of one Monte Carlo experiment.
struct SimConfig {
  double T = 5.0;
  double dt = 1.0 / 250.0;
  std::size_t nPaths = 100000;
  std::uint64_t seed = 1;
  InfoMode infoMode = InfoMode::Partial;
  PreferenceSpec pref;
  double V0 = 1.0;
  double PL = 1.0;  ///< guarantee G = V0 * PL paid at T

  ControlSource controlSource = ControlSource::Optimal;
  Eigen::VectorXd fixedTheta;    ///< used with FixedTheta
  double fixedMultiplier = 0.0;  ///< used with FixedMultiplier
  Eigen::VectorXd fixedWeights;  ///< used with FixedMultiplier
  double controlScale = 1.0;     ///< multiplies the optimal control

  std::optional<double> pinnedY0;  ///< start every path from this factor value
  int odeSteps = kDefaultSteps;
  unsigned workers = 0;  ///< 0 picks the hardware concurrency

  int steps() const;
  double guarantee() const { return V0 * PL; }
  /// Throws ValidationError on a broken invariant.
  void validate(const MarketModel& model) const;
};

/// Factor path and log prices (relative to time 0) on the simulation grid.
struct DriverPath {
  std::vector<double> Y;  ///< steps + 1 values
  Eigen::MatrixXd logS;   ///< n x (steps + 1), first column zero
};

/// Per-path seed derived from the run seed and the path index only.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t pathIndex);

/// Joint simulation of the factor and the log prices. The factor uses the exact
/// Gaussian transition; the log prices use an Euler step sharing the same draws.
DriverPath simulate_drivers(const Market& market, double T, double dt, std::uint64_t seed,
                            std::uint64_t pathIndex, std::optional<double> pinnedY0 = {});

/// Buffer-reusing overload of simulate_drivers.
void simulate_drivers(DriverPath& out, const Market& market, double T, double dt,
                      std::uint64_t seed, std::uint64_t pathIndex,
                      std::optional<double> pinnedY0 = {});

struct PathRecord {
  double terminalV = 0.0;
  double terminalCushion = 0.0;            ///< V_T - G
  double terminalPenalisedCushion = 0.0;   ///< cushion times exp(-penalty / 2)
  /// Log of the penalised cushion under continuous rebalancing of the same
  /// piecewise-constant exposures; never absorbed, used for utility estimates.
  double logShadowCushion = 0.0;
  bool absorbed = false;
  double tau = 0.0;     ///< absorption time, T when not absorbed
  double breach = 0.0;  ///< (G - V_T)^+ for absorbed paths
};

/// Exposure rule evaluated on the simulation grid: theta_j = slope_j x + intercept_j.
class ControlSchedule {
 public:
  /// `sol` is required for the optimal control and ignored otherwise.
  ControlSchedule(const Market& market, const SimConfig& config, const SolvedProblem* sol);

  void theta(int j, double x, double* out) const;
  int n() const { return n_; }

 private:
  int n_ = 0;
  Eigen::MatrixXd slope_;      // n x steps
  Eigen::MatrixXd intercept_;  // n x steps
};

/// Grid-time history of one portfolio path, filled on request.
struct PathTrace {
  std::vector<double> t;
  std::vector<double> V;
  std::vector<double> F;
  std::vector<double> factor;  ///< latent factor value
  std::vector<double> state;   ///< value seen by the rule (factor or its estimate)
  Eigen::MatrixXd theta;       ///< n x steps, exposure per unit of cushion on [t_j, t_j+1)
};

/// Evolve the insured portfolio along one driver path. In partial-information
/// mode `filter` must be provided and the rule sees the filtered estimate.
PathRecord evolve_ppi(const DriverPath& drivers, const SimConfig& config, const Market& market,
                      const ControlSchedule& controls, const FilterSchedule* filter,
                      PathTrace* trace = nullptr);

struct SimOutput {
  SimConfig config;
  std::vector<PathRecord> samples;
  SummaryStats stats;     ///< of terminal wealth
  SummaryErrors errors;
  std::vector<double> terminal_wealth() const;
};

/// Solve what the configuration needs and run every path.
SimOutput run_monte_carlo(const Market& market, const SimConfig& config);

/// Same with the deterministic ingredients supplied by the caller.
SimOutput run_monte_carlo(const Market& market, const SimConfig& config, const SolvedProblem* sol);

/// Re-run path `pathIndex` of a Monte Carlo experiment and return its history.
PathTrace trace_path(const Market& market, const SimConfig& config, const SolvedProblem* sol,
                     std::uint64_t pathIndex);

/// One CSV row per path.
void write_paths_csv(const SimOutput& out, std::ostream& os);

/// Stats block and configuration echo as a JSON document.
std::string stats_json(const SimOutput& out);

}  // namespace ppi
