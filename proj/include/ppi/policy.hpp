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

#include <optional>

#include <Eigen/Dense>

#include "ppi/model.hpp"
#include "ppi/riccati.hpp"

namespace ppi {

enum class InfoMode { Full, Partial };

/// Everything needed to evaluate controls and values for one preference:
/// the variance curve (on the doubled grid), the CRRA coefficient grids or the
/// log closed forms.
struct SolvedProblem {
  PreferenceSpec pref;
  double T = 0.0;
  EffectiveRisk risk;
  FilterVarianceCurve variance;
  std::optional<OdeGrid> full;       ///< CRRA only
  std::optional<OdeGrid> partial;    ///< CRRA only
  std::optional<LogCoefficients> log;  ///< log utility only
};

/// Solve every deterministic ingredient for `pref` on [0, T].
SolvedProblem solve_problem(const Market& market, const PreferenceSpec& pref, double T,
                            int steps = kDefaultSteps);

struct ControlVector {
  Eigen::VectorXd theta;  ///< cushion exposure per asset
  double t = 0.0;
  double state = 0.0;     ///< y (full information) or gamma (partial information)
};

/// Feedback control written as slope * state + intercept at a fixed time.
struct AffineControl {
  Eigen::VectorXd slope;
  Eigen::VectorXd intercept;
};

/// Affine coefficients of the optimal control at time t. Errors: OutOfGrid.
AffineControl affine_control(double t, const Market& market, const SolvedProblem& sol,
                             InfoMode mode);

/// Optimal control with the factor observed. For log utility `fullGrid` is ignored
/// and may be null.
ControlVector theta_full(double t, double y, const Market& market, const PreferenceSpec& pref,
                         const OdeGrid* fullGrid);

/// Optimal control given the filtered estimate gamma.
ControlVector theta_partial(double t, double gamma, const Market& market,
                            const PreferenceSpec& pref, const OdeGrid* partialGrid,
                            const FilterVarianceCurve& variance);

/// Pointwise objective maximised by the optimal control at (t, x):
/// theta'(a x + b - r) - theta' Q theta / 2 + theta' v (f x + g), with Q the
/// effective risk matrix and v the cross vector of the chosen information mode.
double control_objective(const Eigen::VectorXd& theta, double t, double x, const Market& market,
                         const SolvedProblem& sol, InfoMode mode);

struct MultiplierWeights {
  double m = 0.0;
  Eigen::VectorXd pi;
};

/// m = sum(theta), pi = theta / m with the last weight closing the budget.
/// Errors: DegenerateMultiplier when |m| <= 1e-12.
MultiplierWeights multiplier_and_weights(const Eigen::VectorXd& theta);

struct DemandDecomposition {
  Eigen::VectorXd myopic;
  Eigen::VectorXd intertemporal;
  Eigen::VectorXd partialCorrection;  ///< zero under full information
};

/// Myopic / hedging / filtering split of the optimal control for two
/// uncorrelated assets. Errors: WrongShape.
DemandDecomposition two_asset_decomposition(double t, double state, const Market& market,
                                            const SolvedProblem& sol, InfoMode mode);

struct Exposures {
  Eigen::VectorXd risky;
  double riskFree = 1.0;
};

/// Fraction of wealth in each risky asset, m pi_i (V - F)^+ / V, and the remainder.
Exposures exposures(double m, const Eigen::VectorXd& pi, double V, double F);

/// Same as above with theta = m pi supplied directly (defined even when m = 0).
Exposures exposures_from_theta(const Eigen::VectorXd& theta, double V, double F);

}  // namespace ppi
