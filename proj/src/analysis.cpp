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
#include "ppi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "ppi/errors.hpp"

namespace ppi {

namespace {

void check_cushion(double c) {
  if (!(c > 0.0)) throw ValidationError("NonPositiveCushion", "cushion must be positive");
}

double crra_scale(double c, double delta) {
  return std::pow(c, 1.0 - delta) / (1.0 - delta);
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

template <class F>
double grid_sup(const OdeGrid& grid, F&& value) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) best = std::max(best, value(i));
  return best;
}

}  // namespace

double value_function(double t, double c, double x, const Market& market,
                      const SolvedProblem& sol, InfoMode mode, LogForm logForm) {
  check_cushion(c);
  if (sol.pref.is_log()) {
    const auto& lc = *sol.log;
    if (!(t >= -1e-12 && t <= sol.T + 1e-12)) {
      throw ValidationError("OutOfGrid", "time outside [0, T]");
    }
    const double f = lc.f(t), g = lc.g(t);
    const double h = mode == InfoMode::Full ? lc.h(t) : lc.h_tilde(t, sol.variance, logForm);
    if (logForm == LogForm::AsPrinted) {
      return std::log(c) + market.model.r * (sol.T - t) + f * x * x + g * x + h;
    }
    return std::log(c) + 0.5 * f * x * x + g * x + h;
  }
  const OdeGrid& grid = mode == InfoMode::Full ? *sol.full : *sol.partial;
  const double expo = 0.5 * grid.f_at(t) * x * x + grid.g_at(t) * x + grid.h_at(t);
  return crra_scale(c, sol.pref.delta) * std::exp(expo);
}

double loss_of_utility(double t, double c, double gamma, const Market& market,
                       const SolvedProblem& sol) {
  check_cushion(c);
  if (sol.pref.is_log()) {
    return 0.5 * sol.log->A * sol.variance.integral_P(t);
  }
  const double k = 1.0 - sol.pref.delta;
  const double info = information_integral(*sol.full, sol.variance, market, sol.pref, t);
  const OdeGrid& bar = *sol.partial;
  const double expo = 0.5 * bar.f_at(t) * gamma * gamma + bar.g_at(t) * gamma + bar.h_at(t);
  return crra_scale(c, sol.pref.delta) * std::expm1(0.5 * k * info) * std::exp(expo);
}

double efficiency(const Market& market, const SolvedProblem& sol) {
  if (sol.pref.is_log()) {
    return std::exp(-0.5 * sol.log->A * sol.variance.integral_P(0.0));
  }
  return std::exp(-0.5 * information_integral(*sol.full, sol.variance, market, sol.pref, 0.0));
}

double factor_variance(const MarketModel& model, double t) {
  if (std::abs(model.lambda) < 1e-12) return model.p0 + model.sigmaY * model.sigmaY * t;
  const double vInf = model.sigmaY * model.sigmaY / (-2.0 * model.lambda);
  const double e = std::exp(2.0 * model.lambda * t);
  return model.p0 * e + vInf * (1.0 - e);
}

AdmissibilityReport admissibility_report(const Market& market, const SolvedProblem& sol,
                                         const AdmissibilityParams& params) {
  const auto& m = market.model;
  AdmissibilityReport rep;
  rep.delta = sol.pref.delta;
  rep.epsilon = sol.pref.epsilon;
  rep.params = params;

  const Eigen::MatrixXd& theta = sol.risk.thetaHat;
  const Eigen::LLT<Eigen::MatrixXd> llt(theta);
  rep.aM = m.a.cwiseAbs().maxCoeff();
  rep.bM = market.excess.cwiseAbs().maxCoeff();
  rep.w = max_abs(market.cov);
  rep.wTilde = max_abs(theta);
  rep.varYT = factor_variance(m, sol.T);
  rep.varYMax = std::max(m.p0, rep.varYT);
  rep.stationaryVariance = std::abs(m.lambda) < 1e-12
                               ? std::numeric_limits<double>::infinity()
                               : m.sigmaY * m.sigmaY / (-2.0 * m.lambda);

  const bool isLog = sol.pref.is_log();
  rep.deltaAdmissible = !isLog && is_admissible_delta(market, sol.pref.delta, sol.pref.epsilon);

  auto add = [&](std::string name, std::string regime, double value, bool automatic) {
    AdmissibilityCheck c;
    c.name = std::move(name);
    c.regime = std::move(regime);
    c.value = value;
    c.automatic = automatic;
    c.passed = automatic || value > 0.0;
    rep.checks.push_back(c);
  };

  if (isLog) {
    add("risk_aversion_admissible", "full", 0.0, false);
    add("risk_aversion_admissible", "partial", 0.0, false);
    return rep;
  }

  const OdeGrid& full = *sol.full;
  const OdeGrid& bar = *sol.partial;
  const double supF = grid_sup(full, [&](std::size_t i) { return full.f[i]; });
  const double supG = grid_sup(full, [&](std::size_t i) { return full.g[i]; });
  const double supFbar = grid_sup(bar, [&](std::size_t i) { return bar.f[i]; });
  const double supPFbar =
      grid_sup(bar, [&](std::size_t i) { return sol.variance.P_at(bar.t[i]) * bar.f[i]; });

  rep.c1 = llt.solve(m.a + market.cross * supF).cwiseAbs().maxCoeff();
  rep.c2 = llt.solve(market.excess + market.cross * supG).cwiseAbs().maxCoeff();
  const Eigen::MatrixXd& sS = market.tm.sigmaTildeS;
  const Eigen::MatrixXd rotate = sS * sS.inverse().transpose();
  rep.c1Tilde =
      llt.solve(m.a + rotate * (m.a * supPFbar + market.cross * supFbar)).cwiseAbs().maxCoeff();

  const double delta = sol.pref.delta;
  const double k = 1.0 - delta;
  const double a1 = 1.0 + params.alpha;
  const double lead = 8.0 * params.d * k * a1 * m.n * sol.T;
  const double f0 = full.f_at(0.0);
  const double p0 = sol.variance.P_at(0.0);
  const double fbar0 = f0 / (1.0 - p0 * f0);

  auto admissibility = [&](double c1) {
    if (delta < 1.0) {
      const double mult = std::max(1.0, params.d * k * a1 * rep.w);
      return 1.0 - lead * (mult * c1 * c1 + rep.aM * rep.aM) * rep.varYMax;
    }
    const double mult = std::min(-(1.0 + rep.w), params.d * k * a1 * rep.wTilde);
    return 1.0 - lead * (mult * c1 * c1 - rep.aM * rep.aM) * rep.varYMax;
  };

  const bool low = delta < 1.0;
  add("risk_aversion_admissible", "full", rep.deltaAdmissible ? 1.0 : 0.0, false);
  add("verification", "full", 1.0 - params.q * a1 * f0 * rep.varYMax, !low);
  add("strategy_admissibility", "full", admissibility(rep.c1), false);
  add("risk_aversion_admissible", "partial", rep.deltaAdmissible ? 1.0 : 0.0, false);
  add("verification", "partial", 1.0 - params.q * a1 * fbar0 * rep.varYMax, !low);
  add("strategy_admissibility", "partial", admissibility(rep.c1Tilde), false);

  rep.overallFull = true;
  rep.overallPartial = true;
  for (const auto& c : rep.checks) {
    bool& flag = c.regime == "full" ? rep.overallFull : rep.overallPartial;
    flag = flag && c.passed;
  }
  return rep;
}

std::string admissibility_json(const AdmissibilityReport& rep) {
  nlohmann::ordered_json j;
  j["delta"] = rep.delta;
  j["epsilon"] = rep.epsilon;
  j["regime"] = rep.delta < 1.0 ? "delta<1" : (rep.delta > 1.0 ? "delta>1" : "log");
  j["params"] = {{"alpha", rep.params.alpha}, {"d", rep.params.d}, {"q", rep.params.q}};
  j["constants"] = {{"a_M", rep.aM},          {"b_M", rep.bM},       {"w", rep.w},
                    {"w_tilde", rep.wTilde},  {"c1", rep.c1},        {"c2", rep.c2},
                    {"c1_tilde", rep.c1Tilde}, {"var_Y_T", rep.varYT}, {"var_Y_max", rep.varYMax}};
  j["stationary_variance"] = rep.stationaryVariance;
  j["stationary_variance_note"] = "sigma_Y^2 / (-2 lambda)";
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name},
                      {"regime", c.regime},
                      {"value", c.value},
                      {"passed", c.passed},
                      {"automatic", c.automatic}});
  }
  j["checks"] = checks;
  j["overall"] = {{"full", rep.overallFull}, {"partial", rep.overallPartial}};
  return j.dump(2);
}

}  // namespace ppi
