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

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ppi/model.hpp"
#include "ppi/simulator.hpp"

namespace ppi::testing {

/// Four-asset reference market; `scenario` selects the drift loadings (1, 2 or 3).
inline MarketModel reference_model(int scenario = 2) {
  MarketModel m;
  m.n = 4;
  m.k = 2;
  m.a.resize(4);
  switch (scenario) {
    case 1: m.a << 0.090, 0.080, 0.045, 0.045; break;
    case 3: m.a << 0.045, 0.045, 0.080, 0.090; break;
    default: m.a << 0.080, 0.055, 0.045, 0.075; break;
  }
  m.b.resize(4);
  m.b << -0.03, 0.01, 0.01, -0.03;
  m.sigma.resize(4);
  m.sigma << 0.19, 0.21, 0.22, 0.15;
  m.R.resize(5, 5);
  m.R << 1.00, 0.32, 0.25, 0.10, 0.35,
         0.32, 1.00, 0.30, 0.12, -0.25,
         0.25, 0.30, 1.00, 0.20, -0.15,
         0.10, 0.12, 0.20, 1.00, 0.325,
         0.35, -0.25, -0.15, 0.325, 1.00;
  m.r = 0.01;
  m.lambda = -0.5;
  m.beta = 0.5;
  m.sigmaY = 0.05;
  m.gamma0 = 1.0;
  m.p0 = 0.0025;
  return m;
}

/// Two uncorrelated assets, independent of the factor.
inline MarketModel two_asset_model(double a1, double a2, double s1, double s2, double lambda,
                                   double sigmaY) {
  MarketModel m;
  m.n = 2;
  m.k = 1;
  m.a = Eigen::Vector2d(a1, a2);
  m.b = Eigen::Vector2d(0.02, 0.03);
  m.sigma = Eigen::Vector2d(s1, s2);
  m.R = Eigen::Matrix3d::Identity();
  m.r = 0.01;
  m.lambda = lambda;
  m.beta = 0.1;
  m.sigmaY = sigmaY;
  m.gamma0 = 0.5;
  m.p0 = 0.01;
  return m;
}

/// Exact Bayesian filter for the discretised observation scheme: the factor
/// moves by its Gaussian transition and log returns carry an Euler drift, both
/// driven by the same per-step Gaussian vector. Returns the posterior mean of
/// the factor at each grid time.
inline std::vector<double> discrete_kalman(const MarketModel& m, const Eigen::MatrixXd& logReturns,
                                           double dt) {
  const int n = m.n;
  const Eigen::LLT<Eigen::MatrixXd> chol(m.R);
  const Eigen::MatrixXd L = chol.matrixL();
  // Per-step noise loadings on the n + 1 independent standard normals.
  Eigen::MatrixXd obsLoad = m.sigma.asDiagonal() * L.topRows(n);
  const double phi = std::exp(m.lambda * dt);
  const double kappa2 = std::expm1(2.0 * m.lambda * dt) / (2.0 * m.lambda * dt);
  Eigen::RowVectorXd stateLoad = std::sqrt(kappa2) * m.sigmaY * L.row(n);

  const Eigen::MatrixXd obsCov = obsLoad * obsLoad.transpose() * dt;
  const Eigen::VectorXd crossCov = obsLoad * stateLoad.transpose() * dt;
  const double stateVar = stateLoad.squaredNorm() * dt;
  const Eigen::VectorXd c = m.b - 0.5 * m.sigma.cwiseAbs2();
  const double shift = m.beta * (phi - 1.0) / m.lambda;

  std::vector<double> out{m.gamma0};
  double mean = m.gamma0;
  double var = m.p0;
  for (Eigen::Index j = 0; j < logReturns.cols(); ++j) {
    const Eigen::VectorXd predObs = (m.a * mean + c) * dt;
    const Eigen::MatrixXd S = m.a * m.a.transpose() * var * dt * dt + obsCov;
    const Eigen::VectorXd C = phi * var * m.a * dt + crossCov;
    const Eigen::VectorXd gain = S.ldlt().solve(C);
    mean = phi * mean + shift + gain.dot(logReturns.col(j) - predObs);
    var = phi * phi * var + stateVar - gain.dot(C);
    out.push_back(mean);
  }
  return out;
}

inline double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  return s;
}

}  // namespace ppi::testing
