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

#include <vector>

#include <Eigen/Dense>

#include "ppi/model.hpp"
#include "ppi/riccati.hpp"

namespace ppi {

/// Conditional mean of the factor at time t. The conditional variance is the
/// deterministic curve P(t) and is not carried here.
struct FilterState {
  double t = 0.0;
  double gamma = 0.0;
};

FilterState filter_init(const Market& market);

/// One Euler step of the Kalman-Bucy filter driven by observed log returns
/// over [t, t + dt]. Errors: NonFiniteObservation.
FilterState filter_step(const FilterState& state, const Eigen::VectorXd& logReturns, double dt,
                        const Market& market, const FilterVarianceCurve& variance);

/// Filter a whole path. Column j of `logReturns` holds the n log returns over
/// [j dt, (j + 1) dt]. Returns gamma at every node, starting with gamma0.
std::vector<double> filter_run(const Eigen::MatrixXd& logReturns, double dt, const Market& market,
                               const FilterVarianceCurve& variance);

/// Gains P(t_j) M^{-1} precomputed on a uniform simulation grid so the inner
/// Monte Carlo loop does no linear algebra.
class FilterSchedule {
 public:
  FilterSchedule(const Market& market, const FilterVarianceCurve& variance, double dt, int steps);

  /// Advance gamma across step j given the n log returns of that step.
  double advance(int j, double gamma, const double* logReturns) const;

  int steps() const { return steps_; }

 private:
  int n_ = 0;
  int steps_ = 0;
  double dt_ = 0.0;
  double lambda_ = 0.0;
  double beta_ = 0.0;
  Eigen::VectorXd adt_;       // a dt
  Eigen::VectorXd drift_;     // (b - sigma^2 / 2) dt
  Eigen::MatrixXd gains_;     // n x steps
};

}  // namespace ppi
