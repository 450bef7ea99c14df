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

#include "ppi/errors.hpp"
#include "ppi/policy.hpp"
#include "support/fixtures.hpp"

using namespace ppi;
using ppi::testing::reference_model;

namespace {

// Two uncorrelated assets that both co-move with the factor.
MarketModel hedged_pair() {
  auto m = ppi::testing::two_asset_model(0.2, 0.15, 0.2, 0.25, -0.5, 0.1);
  m.R(0, 2) = m.R(2, 0) = 0.4;
  m.R(1, 2) = m.R(2, 1) = -0.3;
  return m;
}

}  // namespace

TEST_CASE("optimal control is a stationary point and maximiser of the pointwise objective") {
  const Market market(reference_model());
  for (double delta : {0.7, 3.0}) {
    const auto sol = solve_problem(market, PreferenceSpec::crra(delta, 1.0), 5.0, 400);
    for (auto mode : {InfoMode::Full, InfoMode::Partial}) {
      for (double t : {0.0, 2.37, 4.9}) {
        const double x = 1.15;
        const auto theta = mode == InfoMode::Full
                               ? theta_full(t, x, market, sol.pref, &*sol.full).theta
                               : theta_partial(t, x, market, sol.pref, &*sol.partial, sol.variance).theta;
        const double best = control_objective(theta, t, x, market, sol, mode);
        const double h = 1e-5;
        for (int i = 0; i < 4; ++i) {
          Eigen::VectorXd up = theta, dn = theta;
          up(i) += h;
          dn(i) -= h;
          const double up_v = control_objective(up, t, x, market, sol, mode);
          const double dn_v = control_objective(dn, t, x, market, sol, mode);
          CHECK(std::abs((up_v - dn_v) / (2.0 * h)) < 1e-8);
          CHECK(up_v < best);
          CHECK(dn_v < best);
        }
        const auto aff = affine_control(t, market, sol, mode);
        CHECK((aff.slope * x + aff.intercept - theta).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("log control is myopic and ignores the carbon-free risk aversion") {
  const auto m = reference_model();
  const Market market(m);
  const auto pref = PreferenceSpec::log(0.5);
  const auto risk = effective_risk(market, pref);
  const Eigen::VectorXd mu = m.a * 0.8 + (m.b.array() - m.r).matrix();
  const auto full = theta_full(1.0, 0.8, market, pref, nullptr);
  const FilterVarianceCurve none;
  const auto partial = theta_partial(1.0, 0.8, market, pref, nullptr, none);
  CHECK((risk.thetaLog * full.theta - mu).norm() < 1e-14);
  CHECK((full.theta - partial.theta).norm() == 0.0);
}

TEST_CASE("controls scale inversely with risk aversion when nothing is hedged") {
  const Market market(ppi::testing::two_asset_model(0.5, 0.4, 0.2, 0.3, -0.2, 0.1));
  const auto low = solve_problem(market, PreferenceSpec::crra(2.0, 0.0), 1.0, 200);
  const auto high = solve_problem(market, PreferenceSpec::crra(4.0, 0.0), 1.0, 200);
  const auto a = theta_full(0.3, 0.5, market, low.pref, &*low.full).theta;
  const auto b = theta_full(0.3, 0.5, market, high.pref, &*high.full).theta;
  CHECK((a - 2.0 * b).norm() < 1e-14);
}

TEST_CASE("carbon aversion only shrinks brown exposure in an uncorrelated market") {
  const Market market(ppi::testing::two_asset_model(0.5, 0.4, 0.2, 0.3, -0.2, 0.1));
  const auto clean = theta_full(0.0, 0.5, market, PreferenceSpec::log(0.0), nullptr).theta;
  const auto green = theta_full(0.0, 0.5, market, PreferenceSpec::log(2.0), nullptr).theta;
  CHECK(green(0) == doctest::Approx(clean(0)));
  CHECK(green(1) == doctest::Approx(clean(1) / 3.0));
}

TEST_CASE("multiplier and weights") {
  Eigen::VectorXd theta(3);
  theta << 0.5, 1.5, -0.25;
  const auto mw = multiplier_and_weights(theta);
  CHECK(mw.m == doctest::Approx(1.75));
  CHECK(mw.pi.sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((mw.m * mw.pi - theta).norm() < 1e-14);

  Eigen::VectorXd flat(2);
  flat << 1.0, -1.0;
  try {
    multiplier_and_weights(flat);
    FAIL("expected DegenerateMultiplier");
  } catch (const ValidationError& e) {
    CHECK(e.code() == "DegenerateMultiplier");
  }
}

TEST_CASE("exposures split wealth between the cushion rule and the riskless asset") {
  Eigen::VectorXd pi(2);
  pi << 0.25, 0.75;
  const auto e = exposures(4.0, pi, 1.2, 0.9);
  CHECK(e.risky(0) == doctest::Approx(4.0 * 0.25 * 0.3 / 1.2));
  CHECK(e.risky(1) == doctest::Approx(4.0 * 0.75 * 0.3 / 1.2));
  CHECK(e.riskFree == doctest::Approx(1.0 - 4.0 * 0.3 / 1.2));
  const auto floor = exposures(4.0, pi, 0.8, 0.9);
  CHECK(floor.risky.norm() == 0.0);
  CHECK(floor.riskFree == 1.0);
  CHECK_THROWS_AS(exposures(1.0, pi, 0.0, 0.0), ValidationError);
}

TEST_CASE("two-asset demand components add up to the optimal control") {
  const Market market(hedged_pair());
  for (double delta : {0.7, 3.0}) {
    const auto sol = solve_problem(market, PreferenceSpec::crra(delta, 0.7), 2.0, 400);
    for (auto mode : {InfoMode::Full, InfoMode::Partial}) {
      const double t = 0.6, x = 0.9;
      const auto parts = two_asset_decomposition(t, x, market, sol, mode);
      const auto theta = mode == InfoMode::Full
                             ? theta_full(t, x, market, sol.pref, &*sol.full).theta
                             : theta_partial(t, x, market, sol.pref, &*sol.partial, sol.variance).theta;
      CHECK((parts.myopic + parts.intertemporal + parts.partialCorrection - theta).norm() < 1e-12);
      CHECK(parts.intertemporal.norm() > 0.0);
      if (mode == InfoMode::Full) CHECK(parts.partialCorrection.norm() == 0.0);
    }
  }
  const Market four(reference_model());
  const auto sol = solve_problem(four, PreferenceSpec::crra(3.0, 0.0), 1.0, 200);
  CHECK_THROWS_WITH_AS(two_asset_decomposition(0.0, 1.0, four, sol, InfoMode::Full),
                       doctest::Contains("WrongShape"), ValidationError);
}

TEST_CASE("controls outside the horizon are rejected") {
  const Market market(reference_model());
  const auto sol = solve_problem(market, PreferenceSpec::crra(3.0, 0.0), 1.0, 200);
  CHECK_THROWS_WITH_AS(affine_control(1.5, market, sol, InfoMode::Full),
                       doctest::Contains("OutOfGrid"), ValidationError);
}
