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

#include <string>
#include <vector>

#include "ppi/model.hpp"
#include "ppi/policy.hpp"
#include "ppi/riccati.hpp"

namespace ppi {

/// Value of the insurer's problem at time t for cushion c and factor state x
/// (the latent factor in Full mode, its filtered estimate in Partial mode).
/// `logForm` only affects log utility. Errors: NonPositiveCushion, OutOfGrid.
double value_function(double t, double c, double x, const Market& market,
                      const SolvedProblem& sol, InfoMode mode,
                      LogForm logForm = LogForm::Consistent);

/// Expected value gap between a fully and a partially informed insurer who
/// share the cushion c and the filtered estimate gamma. Errors: NonPositiveCushion.
double loss_of_utility(double t, double c, double gamma, const Market& market,
                       const SolvedProblem& sol);

/// Fraction of the initial cushion that makes the fully informed insurer
/// indifferent to the partially informed outcome. Lies in (0, 1].
double efficiency(const Market& market, const SolvedProblem& sol);

/// Free constants of the sufficient conditions for verification and admissibility.
struct AdmissibilityParams {
  double alpha = 0.1;
  double d = 1.1;
  double q = 1.1;
};

struct AdmissibilityCheck {
  std::string name;
  std::string regime;  ///< "full" or "partial"
  double value = 0.0;  ///< left-hand side; the check passes when it is positive
  bool passed = false;
  bool automatic = false;  ///< passed by sign of the risk aversion, value not needed
};

struct AdmissibilityReport {
  double delta = 0.0;
  double epsilon = 0.0;
  AdmissibilityParams params;

  double aM = 0.0;
  double bM = 0.0;
  double w = 0.0;
  double wTilde = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c1Tilde = 0.0;
  double varYT = 0.0;
  double varYMax = 0.0;
  double stationaryVariance = 0.0;  ///< sigmaY^2 / (-2 lambda)
  bool deltaAdmissible = false;

  std::vector<AdmissibilityCheck> checks;
  bool overallFull = false;
  bool overallPartial = false;
};

/// Variance of the latent factor at time t under its prior.
double factor_variance(const MarketModel& model, double t);

/// Evaluate every sufficient condition for the solved CRRA problem.
/// Log utility (delta = 1) is outside both regimes: all checks report as failed.
AdmissibilityReport admissibility_report(const Market& market, const SolvedProblem& sol,
                                         const AdmissibilityParams& params = {});

std::string admissibility_json(const AdmissibilityReport& report);

}  // namespace ppi
