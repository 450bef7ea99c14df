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

#include <Eigen/Dense>

namespace ppi {

/// Market and latent-factor parameters. Time is measured in years.
///
/// Asset i has log-price drift a_i Y + b_i - sigma_i^2 / 2 and volatility sigma_i.
/// The factor follows dY = (lambda Y + beta) dt + sigmaY dW^Y with
/// Y_0 ~ N(gamma0, p0). R is the joint correlation of (W^S_1..W^S_n, W^Y).
/// The first k assets are green, the remaining n - k are brown.
struct MarketModel {
  int n = 0;
  int k = 0;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd R;
  double r = 0.01;
  double lambda = 0.0;
  double beta = 0.0;
  double sigmaY = 0.0;
  double gamma0 = 0.0;
  double p0 = 0.0;

  /// Throws ValidationError naming the first violated invariant.
  /// Covers shapes, positivity and the symmetry / unit-diagonal / range of R.
  /// Positive definiteness of R is checked by decompose_correlation.
  void validate() const;
};

/// Uncorrelated-driver representation obtained from the Cholesky factor of R.
struct TransformedModel {
  Eigen::MatrixXd L;             ///< (n+1)x(n+1) lower triangular, L L^T = R
  Eigen::MatrixXd sigmaTildeS;   ///< n x n, diag(sigma) * L_S
  Eigen::RowVectorXd sigmaTildeY;  ///< 1 x n, sigmaY * (last row of L, first n entries)
  double sigmaTildeYScalar = 0.0;  ///< sigmaY * L(n, n)
};

/// Pivot tolerance for the correlation Cholesky factorisation.
inline constexpr double kPivotTolerance = 1e-10;

/// Cholesky factorisation of the model's correlation matrix plus the derived
/// volatility loadings. Errors: AsymmetricInput, NotPositiveDefinite.
TransformedModel decompose_correlation(const MarketModel& model);

enum class Utility { CRRA, Log };

/// Investor preferences: utility family, relative risk aversion and carbon aversion.
struct PreferenceSpec {
  Utility utility = Utility::Log;
  double delta = 1.0;
  double epsilon = 0.0;

  /// CRRA with risk aversion delta; delta == 1 is routed to the log branch.
  static PreferenceSpec crra(double delta, double epsilon);
  static PreferenceSpec log(double epsilon);

  bool is_log() const { return utility == Utility::Log; }
  /// Risk aversion used in the effective risk matrix (1 for log utility).
  double risk_aversion() const { return is_log() ? 1.0 : delta; }

  /// Penalty mask e with k leading zeros followed by epsilon.
  Eigen::VectorXd carbon_mask(int n, int k) const;

  void validate() const;
};

/// Carbon penalty and the two effective risk matrices.
struct EffectiveRisk {
  Eigen::MatrixXd penalty;    ///< diag(e_i sigma_i^2)
  Eigen::MatrixXd thetaHat;   ///< penalty + delta * M
  Eigen::MatrixXd thetaLog;   ///< penalty + M
};

/// Validated model with its transformed representation and the quantities
/// every solver needs. Immutable after construction.
struct Market {
  MarketModel model;
  TransformedModel tm;
  Eigen::MatrixXd cov;       ///< M = sigmaTildeS sigmaTildeS^T
  Eigen::MatrixXd covInv;    ///< M^{-1}
  Eigen::VectorXd cross;     ///< u = sigmaTildeS sigmaTildeY^T, asset/factor covariance
  Eigen::VectorXd excess;    ///< b - r

  explicit Market(MarketModel m);
};

EffectiveRisk effective_risk(const Market& market, const PreferenceSpec& pref);

/// Riccati discriminant at risk aversion x with carbon aversion epsilon:
/// [(1-x) u'Q^{-1}a + lambda]^2 - [(1-x)^2 u'Q^{-1}u + (1-x) sigmaY^2] a'Q^{-1}a
/// where Q is the effective risk matrix evaluated at x.
double discriminant(const Market& market, double x, double epsilon);

/// True iff delta != 1 and the discriminant at delta is strictly positive.
bool is_admissible_delta(const Market& market, double delta, double epsilon);

/// Lower edge of the admissible risk-aversion region for two uncorrelated
/// assets independent of the factor. Returns 0 when every delta is admissible.
double two_asset_delta_star(double a1, double a2, double sigma1, double sigma2,
                            double lambda, double sigmaY, double epsilon);

}  // namespace ppi
