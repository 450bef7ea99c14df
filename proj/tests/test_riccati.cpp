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
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ppi/errors.hpp"
#include "ppi/riccati.hpp"
#include "support/fixtures.hpp"

using namespace ppi;
using ppi::testing::reference_model;
using ppi::testing::two_asset_model;

namespace {

struct Coeffs {
  double A, B, C, D, E, K;
};

// Coefficients of the exponent equations assembled from the raw inputs.
Coeffs assemble(const MarketModel& m, double delta, double eps, const Eigen::VectorXd& v, double q) {
  const Eigen::MatrixXd M =
      m.sigma.asDiagonal() * m.R.topLeftCorner(m.n, m.n) * m.sigma.asDiagonal();
  Eigen::MatrixXd Q = delta * M;
  for (int i = m.k; i < m.n; ++i) Q(i, i) += eps * m.sigma(i) * m.sigma(i);
  const Eigen::MatrixXd Qi = Q.inverse();
  const Eigen::VectorXd ex = m.b.array() - m.r;
  const double k = 1.0 - delta;
  return {k * v.dot(Qi * v) + q,     k * v.dot(Qi * m.a) + m.lambda, k * m.a.dot(Qi * m.a),
          k * v.dot(Qi * ex) + m.beta, k * m.a.dot(Qi * ex),          k * m.r + 0.5 * k * ex.dot(Qi * ex)};
}

Eigen::VectorXd cross_vector(const MarketModel& m) {
  Eigen::VectorXd u(m.n);
  for (int i = 0; i < m.n; ++i) u(i) = m.sigma(i) * m.sigmaY * m.R(i, m.n);
  return u;
}

// Fine-step explicit midpoint integration of the full-information equations in
// time to maturity; returns (f, g, h) at t = 0.
std::array<double, 3> full_info_oracle(const MarketModel& m, double delta, double eps, double T) {
  const Coeffs c = assemble(m, delta, eps, cross_vector(m), m.sigmaY * m.sigmaY);
  auto rhs = [&](const std::array<double, 3>& y) {
    const double F = y[0], G = y[1];
    return std::array<double, 3>{c.A * F * F + 2.0 * c.B * F + c.C,
                                 (c.B + c.A * F) * G + c.D * F + c.E,
                                 c.K + c.D * G + 0.5 * m.sigmaY * m.sigmaY * F + 0.5 * c.A * G * G};
  };
  const int steps = 200000;
  const double h = T / steps;
  std::array<double, 3> y{0, 0, 0};
  for (int s = 0; s < steps; ++s) {
    const auto k1 = rhs(y);
    std::array<double, 3> mid;
    for (int i = 0; i < 3; ++i) mid[i] = y[i] + 0.5 * h * k1[i];
    const auto k2 = rhs(mid);
    for (int i = 0; i < 3; ++i) y[i] += h * k2[i];
  }
  return y;
}

double filter_variance_oracle(const MarketModel& m, double T) {
  const Eigen::MatrixXd M =
      m.sigma.asDiagonal() * m.R.topLeftCorner(m.n, m.n) * m.sigma.asDiagonal();
  const Eigen::MatrixXd Mi = M.inverse();
  const Eigen::VectorXd u = cross_vector(m);
  auto rhs = [&](double P) {
    const Eigen::VectorXd pb = u + P * m.a;
    return 2.0 * m.lambda * P + m.sigmaY * m.sigmaY - pb.dot(Mi * pb);
  };
  const int steps = 200000;
  const double h = T / steps;
  double P = m.p0;
  for (int s = 0; s < steps; ++s) P += h * rhs(P + 0.5 * h * rhs(P));
  return P;
}

}  // namespace

TEST_CASE("full-information coefficients agree with a fine midpoint integration") {
  for (int sc : {1, 3}) {
    const auto m = reference_model(sc);
    const Market market(m);
    for (double delta : {0.7, 3.0}) {
      for (double eps : {0.0, 1.0}) {
        const auto grid = solve_full_info(market, PreferenceSpec::crra(delta, eps), 5.0);
        const auto ref = full_info_oracle(m, delta, eps, 5.0);
        CHECK(grid.f.front() == doctest::Approx(ref[0]).epsilon(1e-8));
        CHECK(grid.g.front() == doctest::Approx(ref[1]).epsilon(1e-8));
        CHECK(grid.h.front() == doctest::Approx(ref[2]).epsilon(1e-8));
        CHECK(grid.f.back() == 0.0);
        CHECK(grid.g.back() == 0.0);
        CHECK(grid.h.back() == 0.0);
      }
    }
  }
}

TEST_CASE("without factor exposure the exponent is linear in time to maturity") {
  const auto m = two_asset_model(0.0, 0.0, 0.2, 0.3, -0.4, 0.0);
  const Market market(m);
  const double delta = 0.5, eps = 0.7, T = 3.0;
  const auto grid = solve_full_info(market, PreferenceSpec::crra(delta, eps), T, 300);
  const Coeffs c = assemble(m, delta, eps, Eigen::VectorXd::Zero(2), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid.f[i] == 0.0);
    CHECK(grid.g[i] == 0.0);
    CHECK(grid.h[i] == doctest::Approx(c.K * (T - grid.t[i])).epsilon(1e-12));
  }
}

TEST_CASE("RK4 refinement ratio is close to sixteen") {
  const Market market(reference_model(1));
  const auto pref = PreferenceSpec::crra(0.3, 0.0);
  const double T = 40.0;
  const auto a = solve_full_info(market, pref, T, 100);
  const auto b = solve_full_info(market, pref, T, 200);
  const auto c = solve_full_info(market, pref, T, 400);
  const double ratio = (a.h.front() - b.h.front()) / (b.h.front() - c.h.front());
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("filter variance agrees with a fine midpoint integration") {
  const auto m = reference_model();
  const Market market(m);
  const auto curve = solve_filter_variance(market, 5.0);
  CHECK(curve.P.front() == m.p0);
  CHECK(curve.P.back() == doctest::Approx(filter_variance_oracle(m, 5.0)).epsilon(1e-9));
  CHECK(curve.P_at(2.5) == doctest::Approx(filter_variance_oracle(m, 2.5)).epsilon(1e-9));
  for (double p : curve.P) CHECK(p >= 0.0);
  const Eigen::RowVectorXd pb = curve.Pbar_at(1.0);
  const Eigen::VectorXd expected = cross_vector(m) + curve.P_at(1.0) * m.a;
  CHECK((pb.transpose() - expected).norm() < 1e-12);
}

TEST_CASE("partial-information routes agree on the doubled and on the same grid") {
  const Market market(reference_model());
  for (double delta : {0.7, 3.0}) {
    const auto pref = PreferenceSpec::crra(delta, 1.0);
    const auto doubled = solve_filter_variance(market, 5.0, 2 * 500);
    const auto same = solve_filter_variance(market, 5.0, 500);
    const auto direct = solve_partial_info(market, pref, doubled, 500);
    const auto full = solve_full_info(market, pref, 5.0, 500);
    for (const auto* v : {&doubled, &same}) {
      const auto mapped = partial_from_full(full, *v, market, pref);
      for (std::size_t i = 0; i < direct.size(); ++i) {
        CHECK(std::abs(mapped.f[i] - direct.f[i]) < 1e-6);
        CHECK(std::abs(mapped.g[i] - direct.g[i]) < 1e-6);
        CHECK(std::abs(mapped.h[i] - direct.h[i]) < 1e-6);
      }
    }
  }
}

TEST_CASE("partial-information coefficients follow the barrier transform") {
  const Market market(reference_model(3));
  const auto pref = PreferenceSpec::crra(0.7, 0.0);
  const auto variance = solve_filter_variance(market, 5.0, 2 * 1000);
  const auto full = solve_full_info(market, pref, 5.0, 1000);
  const auto bar = solve_partial_info(market, pref, variance, 1000);
  for (std::size_t i = 0; i < full.size(); i += 50) {
    const double P = variance.P_at(full.t[i]);
    CHECK(bar.f[i] == doctest::Approx(full.f[i] / (1.0 - P * full.f[i])).epsilon(1e-9));
    CHECK(bar.g[i] == doctest::Approx(full.g[i] / (1.0 - P * full.f[i])).epsilon(1e-9));
  }
}

TEST_CASE("sign and monotonicity of the quadratic coefficient") {
  const Market market(reference_model());
  const auto low = solve_full_info(market, PreferenceSpec::crra(0.7, 0.0), 5.0, 500);
  const auto high = solve_full_info(market, PreferenceSpec::crra(3.0, 0.0), 5.0, 500);
  for (std::size_t i = 0; i + 1 < low.size(); ++i) {
    CHECK(low.f[i] > 0.0);
    CHECK(low.f[i + 1] < low.f[i]);
    CHECK(high.f[i] < 0.0);
    CHECK(high.f[i + 1] > high.f[i]);
  }
}

TEST_CASE("solver preconditions") {
  const Market market(reference_model());
  CHECK_THROWS_AS(solve_full_info(market, PreferenceSpec::log(0.0), 5.0), ValidationError);
  CHECK_THROWS_AS(solve_full_info(market, PreferenceSpec::crra(0.7, 0.0), 5.0, 50), ValidationError);

  // A strongly predictive factor makes small risk aversions inadmissible.
  const Market strong(two_asset_model(0.8, 0.6, 0.2, 0.25, -0.1, 0.5));
  try {
    solve_full_info(strong, PreferenceSpec::crra(0.05, 0.0), 1.0);
    FAIL("expected InadmissibleDelta");
  } catch (const Error& e) {
    CHECK(e.code() == "InadmissibleDelta");
  }

  const auto grid = solve_full_info(market, PreferenceSpec::crra(3.0, 0.0), 5.0, 200);
  CHECK_THROWS_AS(grid.f_at(5.5), ValidationError);
  CHECK(grid.f_at(grid.t[3]) == grid.f[3]);
  CHECK(grid.f_at(0.5 * (grid.t[3] + grid.t[4])) ==
        doctest::Approx(0.5 * (grid.f[3] + grid.f[4])));

  auto flat = reference_model();
  flat.lambda = 0.0;
  CHECK_THROWS_AS(log_closed_forms(Market(flat), PreferenceSpec::log(0.0), 5.0), ValidationError);
}

TEST_CASE("log closed forms reproduce the expected integrated growth") {
  const auto m = reference_model(1);
  const Market market(m);
  const double T = 5.0;
  const auto lc = log_closed_forms(market, PreferenceSpec::log(1.0), T);

  // Growth of the log cushion is r + mu' Q^{-1} mu / 2 with mu = a Y + b - r,
  // so its expectation only needs the first two factor moments.
  const auto risk = effective_risk(market, PreferenceSpec::log(1.0));
  const Eigen::MatrixXd Qi = risk.thetaLog.inverse();
  const Eigen::VectorXd ex = m.b.array() - m.r;
  const double A = m.a.dot(Qi * m.a), B = ex.dot(Qi * m.a), C = ex.dot(Qi * ex);
  for (double t : {0.0, 1.3, 4.0}) {
    for (double y : {0.6, 1.0, 1.4}) {
      const int steps = 20000;
      const double h = (T - t) / steps;
      double integral = 0.0;
      for (int s = 0; s <= steps; ++s) {
        const double tau = s * h;
        const double e = std::exp(m.lambda * tau);
        const double mean = y * e + m.beta / m.lambda * (e - 1.0);
        const double var = m.sigmaY * m.sigmaY * std::expm1(2.0 * m.lambda * tau) / (2.0 * m.lambda);
        const double growth = m.r + 0.5 * (A * (mean * mean + var) + 2.0 * B * mean + C);
        integral += (s == 0 || s == steps ? 0.5 : 1.0) * h * growth;
      }
      const double model = 0.5 * lc.f(t) * y * y + lc.g(t) * y + lc.h(t);
      CHECK(model == doctest::Approx(integral).epsilon(1e-8));
    }
  }
  CHECK(lc.f(T) == 0.0);
  CHECK(lc.g(T) == 0.0);
  CHECK(lc.h(T) == 0.0);
}

TEST_CASE("integrated factor moments") {
  const auto m = reference_model();
  const Market market(m);
  const auto variance = solve_filter_variance(market, 5.0);
  const double t = 1.0, T = 5.0, x = 1.2;
  const auto latent = ou_moments(market, t, T, x, MomentMode::Latent);
  const auto filtered = ou_moments(market, t, T, x, MomentMode::Filtered, &variance);
  // Same mean; the estimate carries P(t) e^{2 lambda (s-t)} - P(s) less second moment.
  CHECK(filtered.first == doctest::Approx(latent.first).epsilon(1e-12));
  const double phi = std::expm1(2.0 * m.lambda * (T - t)) / (2.0 * m.lambda);
  const double shift = variance.P_at(t) * phi - variance.integral_P(t);
  CHECK(filtered.second == doctest::Approx(latent.second + shift).epsilon(1e-7));

  const double e1 = std::expm1(m.lambda * (T - t)) / m.lambda;
  const double stationary = -m.beta / m.lambda;
  CHECK(latent.first == doctest::Approx(stationary * (T - t) + (x - stationary) * e1).epsilon(1e-12));
}

TEST_CASE("coefficient CSV layout") {
  const Market market(reference_model());
  const auto grid = tabulate_log(log_closed_forms(market, PreferenceSpec::log(0.0), 5.0), 100);
  std::ostringstream os;
  write_grid_csv(grid, os);
  const std::string csv = os.str();
  CHECK(csv.rfind("t,f,g,h\n", 0) == 0);
  CHECK(csv.find("\n5,0,0,0\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 102);
}
