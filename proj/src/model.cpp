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
#include "ppi/model.hpp"

#include <cmath>
#include <string>

#include "ppi/errors.hpp"

namespace ppi {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError("ValidationError", message);
}

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

void MarketModel::validate() const {
  require(n >= 1, "n must be at least 1");
  require(k >= 0 && k <= n, "k must satisfy 0 <= k <= n");
  require(a.size() == n, "a must have n entries");
  require(b.size() == n, "b must have n entries");
  require(sigma.size() == n, "sigma must have n entries");
  require(R.rows() == n + 1 && R.cols() == n + 1, "R must be (n+1)x(n+1)");
  require(finite(a) && finite(b) && finite(sigma) && finite(R), "parameters must be finite");
  for (int i = 0; i < n; ++i) require(sigma(i) > 0.0, "sigma must be positive");
  require(std::isfinite(r) && std::isfinite(lambda) && std::isfinite(beta) &&
              std::isfinite(gamma0) && std::isfinite(p0) && std::isfinite(sigmaY),
          "scalar parameters must be finite");
  // sigmaY = 0 is accepted so the degenerate deterministic-factor case stays reachable.
  require(sigmaY >= 0.0, "sigmaY must be nonnegative");
  require(p0 >= 0.0, "p0 must be nonnegative");

  const double asym = (R - R.transpose()).cwiseAbs().maxCoeff();
  if (asym > kPivotTolerance) {
    throw ValidationError("AsymmetricInput", "correlation matrix is not symmetric");
  }
  for (int i = 0; i <= n; ++i) {
    require(std::abs(R(i, i) - 1.0) <= 1e-12, "correlation matrix must have unit diagonal");
  }
  if (R.cwiseAbs().maxCoeff() > 1.0 + 1e-12) {
    throw ValidationError("NotPositiveDefinite", "correlation entries must lie in [-1, 1]");
  }
}

TransformedModel decompose_correlation(const MarketModel& model) {
  model.validate();
  const int n = model.n;
  const int dim = n + 1;

  // Plain Cholesky so the pivot before the square root can be tested directly.
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    double pivot = model.R(j, j);
    for (int p = 0; p < j; ++p) pivot -= L(j, p) * L(j, p);
    if (!(pivot >= kPivotTolerance)) {
      throw ValidationError("NotPositiveDefinite",
                            "correlation matrix pivot " + std::to_string(j) + " below tolerance");
    }
    L(j, j) = std::sqrt(pivot);
    for (int i = j + 1; i < dim; ++i) {
      double s = model.R(i, j);
      for (int p = 0; p < j; ++p) s -= L(i, p) * L(j, p);
      L(i, j) = s / L(j, j);
    }
  }

  TransformedModel tm;
  tm.L = L;
  tm.sigmaTildeS = model.sigma.asDiagonal() * L.topLeftCorner(n, n);
  tm.sigmaTildeY = model.sigmaY * L.block(n, 0, 1, n);
  tm.sigmaTildeYScalar = model.sigmaY * L(n, n);
  return tm;
}

PreferenceSpec PreferenceSpec::crra(double delta, double epsilon) {
  PreferenceSpec p;
  p.utility = delta == 1.0 ? Utility::Log : Utility::CRRA;
  p.delta = delta;
  p.epsilon = epsilon;
  p.validate();
  return p;
}

PreferenceSpec PreferenceSpec::log(double epsilon) {
  PreferenceSpec p;
  p.utility = Utility::Log;
  p.delta = 1.0;
  p.epsilon = epsilon;
  p.validate();
  return p;
}

Eigen::VectorXd PreferenceSpec::carbon_mask(int n, int k) const {
  Eigen::VectorXd e = Eigen::VectorXd::Constant(n, epsilon);
  e.head(k).setZero();
  return e;
}

void PreferenceSpec::validate() const {
  require(std::isfinite(epsilon) && epsilon >= 0.0, "epsilon must be nonnegative");
  if (utility == Utility::CRRA) {
    require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
    require(delta != 1.0, "delta = 1 is the log utility case");
  }
}

Market::Market(MarketModel m) : model(std::move(m)) {
  tm = decompose_correlation(model);
  cov = tm.sigmaTildeS * tm.sigmaTildeS.transpose();
  covInv = cov.llt().solve(Eigen::MatrixXd::Identity(model.n, model.n));
  cross = tm.sigmaTildeS * tm.sigmaTildeY.transpose();
  excess = model.b.array() - model.r;
}

EffectiveRisk effective_risk(const Market& market, const PreferenceSpec& pref) {
  pref.validate();
  const auto& m = market.model;
  const Eigen::VectorXd e = pref.carbon_mask(m.n, m.k);

  EffectiveRisk out;
  out.penalty = (e.array() * m.sigma.array().square()).matrix().asDiagonal();
  out.thetaHat = out.penalty + pref.risk_aversion() * market.cov;
  out.thetaLog = out.penalty + market.cov;
  return out;
}

double discriminant(const Market& market, double x, double epsilon) {
  if (!(x > 0.0)) throw ValidationError("ValidationError", "risk aversion must be positive");
  PreferenceSpec p;
  p.utility = Utility::CRRA;
  p.delta = x;
  p.epsilon = epsilon;
  const auto& m = market.model;
  const Eigen::VectorXd e = p.carbon_mask(m.n, m.k);
  const Eigen::MatrixXd theta =
      Eigen::MatrixXd((e.array() * m.sigma.array().square()).matrix().asDiagonal()) + x * market.cov;

  const Eigen::LLT<Eigen::MatrixXd> llt(theta);
  const Eigen::VectorXd qa = llt.solve(m.a);
  const Eigen::VectorXd qu = llt.solve(market.cross);
  const double k = 1.0 - x;
  const double lin = k * market.cross.dot(qa) + m.lambda;
  const double quad = k * k * market.cross.dot(qu) + k * m.sigmaY * m.sigmaY;
  return lin * lin - quad * m.a.dot(qa);
}

bool is_admissible_delta(const Market& market, double delta, double epsilon) {
  if (delta == 1.0) return false;
  return discriminant(market, delta, epsilon) > 0.0;
}

double two_asset_delta_star(double a1, double a2, double sigma1, double sigma2, double lambda,
                            double sigmaY, double epsilon) {
  require(sigma1 > 0.0 && sigma2 > 0.0, "sigma must be positive");
  require(epsilon >= 0.0, "epsilon must be nonnegative");
  if ((a1 == 0.0 && a2 == 0.0) || sigmaY == 0.0) return 0.0;

  const double s1 = sigma1 * sigma1;
  const double s2 = sigma2 * sigma2;
  const double l2 = lambda * lambda;
  const double v = sigmaY * sigmaY;

  if (a1 == 0.0) {
    const double bar = (a2 * a2 * v - epsilon * l2 * s2) / (l2 * s2 + a2 * a2 * v);
    return std::max(bar, 0.0);
  }

  // Clearing denominators in Delta(x) > 0 gives a quadratic in x.
  const double qa = l2 * s1 * s2 + (a1 * a1 * s2 + a2 * a2 * s1) * v;
  const double qb = epsilon * l2 * s1 * s2 - ((1.0 - epsilon) * a1 * a1 * s2 + a2 * a2 * s1) * v;
  const double qc = -epsilon * a1 * a1 * s2 * v;
  const double disc = qb * qb - 4.0 * qa * qc;
  const double root = (-qb + std::sqrt(std::max(disc, 0.0))) / (2.0 * qa);
  return std::max(root, 0.0);
}

}  // namespace ppi
