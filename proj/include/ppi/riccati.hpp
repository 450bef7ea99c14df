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

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppi/model.hpp"

namespace ppi {

enum class SystemKind { Full, Partial, Filter, Log };

/// Exponent coefficients (f, g, h) of an exponential-quadratic value function on
/// a uniform time grid. Values between nodes are linearly interpolated.
struct OdeGrid {
  SystemKind kind = SystemKind::Full;
  double delta = 0.0;
  double epsilon = 0.0;
  double T = 0.0;
  std::vector<double> t;
  std::vector<double> f;
  std::vector<double> g;
  std::vector<double> h;

  std::size_t size() const { return t.size(); }
  double f_at(double time) const;
  double g_at(double time) const;
  double h_at(double time) const;
};

/// Deterministic conditional variance of the factor given observed prices and
/// the asset/factor innovation covariance row Pbar = u^T + P a^T.
struct FilterVarianceCurve {
  double T = 0.0;
  std::vector<double> t;
  std::vector<double> P;
  std::vector<Eigen::RowVectorXd> Pbar;

  std::size_t size() const { return t.size(); }
  double P_at(double time) const;
  Eigen::RowVectorXd Pbar_at(double time) const;
  /// Trapezoid integral of P over [from, T].
  double integral_P(double from) const;
};

inline constexpr int kDefaultSteps = 2000;
inline constexpr double kBlowUpThreshold = 1e8;
inline constexpr double kBarrierTolerance = 1e-10;

/// Backward RK4 solution of the full-information CRRA system.
/// Errors: InadmissibleDelta, RiccatiBlowUp.
OdeGrid solve_full_info(const Market& market, const PreferenceSpec& pref, double T,
                        int steps = kDefaultSteps);

/// Forward RK4 solution of the filter variance equation with P(0) = p0.
/// Errors: NegativeVariance.
FilterVarianceCurve solve_filter_variance(const Market& market, double T,
                                          int steps = kDefaultSteps);

/// Backward RK4 solution of the partial-information CRRA system. The variance
/// curve must have 2*steps + 1 nodes so RK4 half steps land on nodes.
OdeGrid solve_partial_info(const Market& market, const PreferenceSpec& pref,
                           const FilterVarianceCurve& variance, int steps = kDefaultSteps);

/// Convenience overload that solves the variance curve on the doubled grid.
OdeGrid solve_partial_info(const Market& market, const PreferenceSpec& pref, double T,
                           int steps = kDefaultSteps);

/// Partial-information coefficients obtained algebraically from the full
/// information ones. The variance curve may be on the same grid or on the
/// doubled grid. Errors: SingularTransform.
OdeGrid partial_from_full(const OdeGrid& full, const FilterVarianceCurve& variance,
                          const Market& market, const PreferenceSpec& pref);

/// Which closed form to use for the log-utility coefficients that have two
/// competing expressions (see LogCoefficients).
enum class LogForm { Consistent, AsPrinted };

/// Closed-form log-utility coefficients.
///
/// With A = a'Q^{-1}a, B = a'Q^{-1}(b-r), C = (b-r)'Q^{-1}(b-r) and Q = thetaLog,
/// the full-information value is log c + f y^2 / 2 + g y + h where f, g, h
/// already include the riskless growth r (T - t).
struct LogCoefficients {
  double A = 0.0, B = 0.0, C = 0.0;
  double lambda = 0.0, beta = 0.0, sigmaY = 0.0, r = 0.0, T = 0.0;

  double f(double t) const;
  double g(double t) const;
  double h(double t) const;
  /// Constant term of the partial-information value. Consistent:
  /// h - (A/2)(int_t^T P ds - P(t)(e^{2 lambda (T-t)} - 1)/(2 lambda)).
  /// AsPrinted: h + (A/2)(int_t^T P ds - P(t)(e^{2 lambda (T-t)} - 1)/2).
  double h_tilde(double t, const FilterVarianceCurve& variance,
                 LogForm form = LogForm::Consistent) const;
};

/// Errors: LambdaZero.
LogCoefficients log_closed_forms(const Market& market, const PreferenceSpec& pref, double T);

/// Tabulate the log coefficients on a uniform grid as an OdeGrid.
OdeGrid tabulate_log(const LogCoefficients& lc, int steps = kDefaultSteps);

enum class MomentMode { Latent, Filtered };

struct IntegratedMoments {
  double first = 0.0;   ///< int_t^T E[X_s] ds
  double second = 0.0;  ///< int_t^T E[X_s^2] ds
};

/// Integrated first and second moments of the factor (Latent) or of its
/// filtered estimate (Filtered, which needs the variance curve) started from x at t.
IntegratedMoments ou_moments(const Market& market, double t, double T, double x, MomentMode mode,
                             const FilterVarianceCurve* variance = nullptr);

/// Trapezoid integral over [from, T] of the information-loss integrand
/// P/(1 - P f) (u f + a)' Q^{-1} (u f + a) built from the full-information f.
/// Errors: SingularTransform.
double information_integral(const OdeGrid& full, const FilterVarianceCurve& variance,
                            const Market& market, const PreferenceSpec& pref, double from);

/// CSV dump with header t,f,g,h and 17 significant digits.
void write_grid_csv(const OdeGrid& grid, std::ostream& os);

}  // namespace ppi
