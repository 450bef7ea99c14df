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
#include "ppi/filtering.hpp"

#include <cmath>

#include "ppi/errors.hpp"

namespace ppi {

FilterState filter_init(const Market& market) { return {0.0, market.model.gamma0}; }

FilterState filter_step(const FilterState& state, const Eigen::VectorXd& logReturns, double dt,
                        const Market& market, const FilterVarianceCurve& variance) {
  const auto& m = market.model;
  if (!(dt > 0.0)) throw ValidationError("ValidationError", "dt must be positive");
  if (logReturns.size() != m.n) throw ValidationError("ValidationError", "need n log returns");
  if (!logReturns.allFinite()) {
    throw NumericalError("NonFiniteObservation", "log return is not finite");
  }

  // Observed minus predicted log return; the sigma^2/2 term converts the
  // arithmetic-return drift into log-return units.
  const Eigen::VectorXd expected =
      (m.a * state.gamma + m.b - 0.5 * m.sigma.array().square().matrix()) * dt;
  const Eigen::VectorXd surprise = logReturns - expected;
  const double gain = (variance.Pbar_at(state.t) * market.covInv * surprise)(0, 0);

  FilterState next;
  next.t = state.t + dt;
  next.gamma = state.gamma + (m.lambda * state.gamma + m.beta) * dt + gain;
  return next;
}

std::vector<double> filter_run(const Eigen::MatrixXd& logReturns, double dt, const Market& market,
                               const FilterVarianceCurve& variance) {
  std::vector<double> out;
  out.reserve(logReturns.cols() + 1);
  FilterState s = filter_init(market);
  out.push_back(s.gamma);
  for (Eigen::Index j = 0; j < logReturns.cols(); ++j) {
    s = filter_step(s, logReturns.col(j), dt, market, variance);
    s.t = dt * static_cast<double>(j + 1);
    out.push_back(s.gamma);
  }
  return out;
}

FilterSchedule::FilterSchedule(const Market& market, const FilterVarianceCurve& variance, double dt,
                               int steps)
    : n_(market.model.n), steps_(steps), dt_(dt), lambda_(market.model.lambda),
      beta_(market.model.beta) {
  const auto& m = market.model;
  adt_ = m.a * dt;
  drift_ = (m.b - 0.5 * m.sigma.array().square().matrix()) * dt;
  gains_.resize(n_, steps);
  for (int j = 0; j < steps; ++j) {
    gains_.col(j) = (variance.Pbar_at(dt * j) * market.covInv).transpose();
  }
}

double FilterSchedule::advance(int j, double gamma, const double* logReturns) const {
  double gain = 0.0;
  const double* k = gains_.data() + static_cast<Eigen::Index>(j) * n_;
  for (int i = 0; i < n_; ++i) gain += k[i] * (logReturns[i] - adt_[i] * gamma - drift_[i]);
  return gamma + (lambda_ * gamma + beta_) * dt_ + gain;
}

}  // namespace ppi
