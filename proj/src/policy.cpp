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
#include "ppi/policy.hpp"

#include <cmath>

#include "ppi/errors.hpp"

namespace ppi {

namespace {

void check_time(double t, double T) {
  if (!(t >= -1e-12 && t <= T + 1e-12)) {
    throw ValidationError("OutOfGrid", "time " + std::to_string(t) + " outside [0, T]");
  }
}

// Cross vector and (f, g) pair for the requested information mode.
struct Hedge {
  Eigen::VectorXd v;
  double f = 0.0;
  double g = 0.0;
};

Hedge hedge_terms(double t, const Market& market, const SolvedProblem& sol, InfoMode mode) {
  Hedge out;
  if (sol.pref.is_log()) {
    out.v = Eigen::VectorXd::Zero(market.model.n);
    return out;
  }
  if (mode == InfoMode::Full) {
    out.v = market.cross;
    out.f = sol.full->f_at(t);
    out.g = sol.full->g_at(t);
  } else {
    out.v = sol.variance.Pbar_at(t).transpose();
    out.f = sol.partial->f_at(t);
    out.g = sol.partial->g_at(t);
  }
  return out;
}

const Eigen::MatrixXd& risk_matrix(const SolvedProblem& sol) {
  return sol.pref.is_log() ? sol.risk.thetaLog : sol.risk.thetaHat;
}

}  // namespace

SolvedProblem solve_problem(const Market& market, const PreferenceSpec& pref, double T, int steps) {
  SolvedProblem sol;
  sol.pref = pref;
  sol.T = T;
  sol.risk = effective_risk(market, pref);
  sol.variance = solve_filter_variance(market, T, 2 * steps);
  if (pref.is_log()) {
    sol.log = log_closed_forms(market, pref, T);
  } else {
    sol.full = solve_full_info(market, pref, T, steps);
    sol.partial = solve_partial_info(market, pref, sol.variance, steps);
  }
  return sol;
}

AffineControl affine_control(double t, const Market& market, const SolvedProblem& sol,
                             InfoMode mode) {
  check_time(t, sol.T);
  const Hedge hd = hedge_terms(t, market, sol, mode);
  const Eigen::LLT<Eigen::MatrixXd> llt(risk_matrix(sol));
  AffineControl out;
  out.slope = llt.solve(market.model.a + hd.v * hd.f);
  out.intercept = llt.solve(market.excess + hd.v * hd.g);
  return out;
}

ControlVector theta_full(double t, double y, const Market& market, const PreferenceSpec& pref,
                         const OdeGrid* fullGrid) {
  const auto risk = effective_risk(market, pref);
  Eigen::VectorXd rhs = market.model.a * y + market.excess;
  if (pref.is_log()) {
    return {risk.thetaLog.llt().solve(rhs), t, y};
  }
  if (fullGrid == nullptr) throw ValidationError("ValidationError", "missing coefficient grid");
  check_time(t, fullGrid->T);
  rhs += market.cross * (fullGrid->f_at(t) * y + fullGrid->g_at(t));
  return {risk.thetaHat.llt().solve(rhs), t, y};
}

ControlVector theta_partial(double t, double gamma, const Market& market,
                            const PreferenceSpec& pref, const OdeGrid* partialGrid,
                            const FilterVarianceCurve& variance) {
  const auto risk = effective_risk(market, pref);
  Eigen::VectorXd rhs = market.model.a * gamma + market.excess;
  if (pref.is_log()) {
    return {risk.thetaLog.llt().solve(rhs), t, gamma};
  }
  if (partialGrid == nullptr) throw ValidationError("ValidationError", "missing coefficient grid");
  check_time(t, partialGrid->T);
  rhs += variance.Pbar_at(t).transpose() * (partialGrid->f_at(t) * gamma + partialGrid->g_at(t));
  return {risk.thetaHat.llt().solve(rhs), t, gamma};
}

double control_objective(const Eigen::VectorXd& theta, double t, double x, const Market& market,
                         const SolvedProblem& sol, InfoMode mode) {
  check_time(t, sol.T);
  const Hedge hd = hedge_terms(t, market, sol, mode);
  const Eigen::VectorXd mu = market.model.a * x + market.excess;
  return theta.dot(mu) - 0.5 * theta.dot(risk_matrix(sol) * theta) +
         theta.dot(hd.v) * (hd.f * x + hd.g);
}

MultiplierWeights multiplier_and_weights(const Eigen::VectorXd& theta) {
  const double m = theta.sum();
  if (!(std::abs(m) > 1e-12)) {
    throw ValidationError("DegenerateMultiplier", "exposures sum to zero; weights are undefined");
  }
  MultiplierWeights out;
  out.m = m;
  out.pi = theta / m;
  const Eigen::Index n = theta.size();
  if (n > 0) out.pi(n - 1) = 1.0 - out.pi.head(n - 1).sum();
  return out;
}

DemandDecomposition two_asset_decomposition(double t, double state, const Market& market,
                                            const SolvedProblem& sol, InfoMode mode) {
  const auto& m = market.model;
  if (m.n != 2 || std::abs(m.R(0, 1)) > 0.0) {
    throw ValidationError("WrongShape", "decomposition needs two uncorrelated assets");
  }
  check_time(t, sol.T);
  const Eigen::VectorXd diag = risk_matrix(sol).diagonal();
  const Eigen::VectorXd mu = m.a * state + market.excess;

  DemandDecomposition out;
  out.myopic = mu.cwiseQuotient(diag);
  out.intertemporal = Eigen::VectorXd::Zero(2);
  out.partialCorrection = Eigen::VectorXd::Zero(2);
  if (sol.pref.is_log()) return out;

  if (mode == InfoMode::Full) {
    const double hedge = sol.full->f_at(t) * state + sol.full->g_at(t);
    out.intertemporal = market.cross.cwiseQuotient(diag) * hedge;
  } else {
    const double hedge = sol.partial->f_at(t) * state + sol.partial->g_at(t);
    out.intertemporal = market.cross.cwiseQuotient(diag) * hedge;
    out.partialCorrection = m.a.cwiseQuotient(diag) * (sol.variance.P_at(t) * hedge);
  }
  return out;
}

Exposures exposures(double m, const Eigen::VectorXd& pi, double V, double F) {
  return exposures_from_theta(m * pi, V, F);
}

Exposures exposures_from_theta(const Eigen::VectorXd& theta, double V, double F) {
  if (!(V > 0.0)) throw ValidationError("ValidationError", "wealth must be positive");
  const double cushion = std::max(V - F, 0.0);
  Exposures out;
  out.risky = theta * (cushion / V);
  out.riskFree = 1.0 - out.risky.sum();
  return out;
}

}  // namespace ppi
