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
#include "ppi/riccati.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "ppi/errors.hpp"
#include "ppi/io.hpp"

namespace ppi {

namespace {

double lerp_uniform(const std::vector<double>& t, const std::vector<double>& v, double time) {
  const std::size_t n = t.size();
  if (n == 1) return v[0];
  const double T = t.back();
  if (time < -1e-12 || time > T + 1e-12) {
    throw ValidationError("OutOfGrid", "time " + std::to_string(time) + " outside [0, T]");
  }
  const double dt = T / static_cast<double>(n - 1);
  double pos = std::clamp(time, 0.0, T) / dt;
  std::size_t i = static_cast<std::size_t>(pos);
  if (i >= n - 1) return v[n - 1];
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * v[i] + w * v[i + 1];
}

std::vector<double> uniform_grid(double T, int steps) {
  std::vector<double> t(steps + 1);
  for (int i = 0; i <= steps; ++i) t[i] = T * static_cast<double>(i) / steps;
  t.back() = T;
  return t;
}

// Trapezoid integral over [from, T] of nodal values on a uniform grid, with the
// integrand linearly interpolated at `from`.
double trapezoid_tail(const std::vector<double>& t, const std::vector<double>& v, double from) {
  const std::size_t n = t.size();
  if (n < 2) return 0.0;
  const double T = t.back();
  from = std::clamp(from, 0.0, T);
  if (from >= T) return 0.0;
  const double dt = T / static_cast<double>(n - 1);
  std::size_t i = std::min(static_cast<std::size_t>(from / dt), n - 2);
  const double vFrom = lerp_uniform(t, v, from);
  double sum = 0.5 * (vFrom + v[i + 1]) * (t[i + 1] - from);
  for (std::size_t j = i + 1; j + 1 < n; ++j) sum += 0.5 * (v[j] + v[j + 1]) * dt;
  return sum;
}

// Coefficients of the backward exponential-quadratic system in reversed time
// s = T - t, for cross vector v and factor noise variance q:
//   F' = A F^2 + 2 B F + C
//   G' = (B + A F) G + D F + E
//   H' = K + D G + q F / 2 + A G^2 / 2
struct Coefficients {
  double A, B, D, q;
};

class Riccati {
 public:
  Riccati(const Market& market, const PreferenceSpec& pref)
      : market_(market), k_(1.0 - pref.risk_aversion()) {
    const auto risk = effective_risk(market, pref);
    llt_.compute(risk.thetaHat);
    qa_ = llt_.solve(market.model.a);
    qx_ = llt_.solve(market.excess);
    C_ = k_ * market.model.a.dot(qa_);
    E_ = k_ * market.model.a.dot(qx_);
    K_ = k_ * market.model.r + 0.5 * k_ * market.excess.dot(qx_);
  }

  Coefficients at(const Eigen::VectorXd& v, double q) const {
    const Eigen::VectorXd qv = llt_.solve(v);
    return {k_ * v.dot(qv) + q, k_ * v.dot(qa_) + market_.model.lambda,
            k_ * v.dot(qx_) + market_.model.beta, q};
  }

  std::array<double, 3> rhs(const Coefficients& c, const std::array<double, 3>& y) const {
    const double F = y[0], G = y[1];
    return {c.A * F * F + 2.0 * c.B * F + C_, (c.B + c.A * F) * G + c.D * F + E_,
            K_ + c.D * G + 0.5 * c.q * F + 0.5 * c.A * G * G};
  }

  // One classical RK4 step of length ds; c0, cHalf, c1 are the coefficients at
  // the start, midpoint and end of the step.
  std::array<double, 3> step(const std::array<double, 3>& y, double ds, const Coefficients& c0,
                             const Coefficients& cHalf, const Coefficients& c1) const {
    auto axpy = [](const std::array<double, 3>& base, double s, const std::array<double, 3>& d) {
      return std::array<double, 3>{base[0] + s * d[0], base[1] + s * d[1], base[2] + s * d[2]};
    };
    const auto k1 = rhs(c0, y);
    const auto k2 = rhs(cHalf, axpy(y, 0.5 * ds, k1));
    const auto k3 = rhs(cHalf, axpy(y, 0.5 * ds, k2));
    const auto k4 = rhs(c1, axpy(y, ds, k3));
    std::array<double, 3> out;
    for (int i = 0; i < 3; ++i) out[i] = y[i] + ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
  }

  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }
  double k() const { return k_; }

 private:
  const Market& market_;
  double k_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd qa_, qx_;
  double C_, E_, K_;
};

void check_crra(const Market& market, const PreferenceSpec& pref) {
  pref.validate();
  if (pref.is_log()) {
    throw ValidationError("InadmissibleDelta", "delta = 1 is handled by the log closed forms");
  }
  if (!is_admissible_delta(market, pref.delta, pref.epsilon)) {
    throw ValidationError("InadmissibleDelta",
                          "discriminant is not positive at delta = " + std::to_string(pref.delta));
  }
}

void check_steps(int steps, double T) {
  if (steps < 100) throw ValidationError("ValidationError", "steps must be at least 100");
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("ValidationError", "T must be positive");
}

void store(OdeGrid& grid, int node, const std::array<double, 3>& y) {
  if (!std::isfinite(y[0]) || !std::isfinite(y[1]) || !std::isfinite(y[2]) ||
      std::abs(y[0]) > kBlowUpThreshold) {
    throw NumericalError("RiccatiBlowUp",
                         "coefficient exceeded threshold at t = " + std::to_string(grid.t[node]));
  }
  grid.f[node] = y[0];
  grid.g[node] = y[1];
  grid.h[node] = y[2];
}

double innovation_variance(const Market& market, const Eigen::RowVectorXd& pbar) {
  return (pbar * market.covInv * pbar.transpose())(0, 0);
}

}  // namespace

double OdeGrid::f_at(double time) const { return lerp_uniform(t, f, time); }
double OdeGrid::g_at(double time) const { return lerp_uniform(t, g, time); }
double OdeGrid::h_at(double time) const { return lerp_uniform(t, h, time); }

double FilterVarianceCurve::P_at(double time) const { return lerp_uniform(t, P, time); }

Eigen::RowVectorXd FilterVarianceCurve::Pbar_at(double time) const {
  const std::size_t n = t.size();
  if (n == 1) return Pbar[0];
  if (time < -1e-12 || time > T + 1e-12) {
    throw ValidationError("OutOfGrid", "time " + std::to_string(time) + " outside [0, T]");
  }
  const double dt = T / static_cast<double>(n - 1);
  const double pos = std::clamp(time, 0.0, T) / dt;
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i >= n - 1) return Pbar[n - 1];
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * Pbar[i] + w * Pbar[i + 1];
}

double FilterVarianceCurve::integral_P(double from) const { return trapezoid_tail(t, P, from); }

OdeGrid solve_full_info(const Market& market, const PreferenceSpec& pref, double T, int steps) {
  check_steps(steps, T);
  check_crra(market, pref);

  const Riccati sys(market, pref);
  const auto c = sys.at(market.cross, market.model.sigmaY * market.model.sigmaY);

  OdeGrid grid;
  grid.kind = SystemKind::Full;
  grid.delta = pref.delta;
  grid.epsilon = pref.epsilon;
  grid.T = T;
  grid.t = uniform_grid(T, steps);
  grid.f.assign(steps + 1, 0.0);
  grid.g.assign(steps + 1, 0.0);
  grid.h.assign(steps + 1, 0.0);

  const double ds = T / steps;
  std::array<double, 3> y{0.0, 0.0, 0.0};
  for (int j = 0; j < steps; ++j) {
    y = sys.step(y, ds, c, c, c);
    store(grid, steps - j - 1, y);
  }
  return grid;
}

FilterVarianceCurve solve_filter_variance(const Market& market, double T, int steps) {
  if (steps < 1) throw ValidationError("ValidationError", "steps must be positive");
  if (!(T > 0.0)) throw ValidationError("ValidationError", "T must be positive");
  const auto& m = market.model;
  const double lambda = m.lambda;
  const double v = m.sigmaY * m.sigmaY;

  auto pbar = [&](double p) -> Eigen::RowVectorXd {
    return market.cross.transpose() + p * m.a.transpose();
  };
  auto rhs = [&](double p) { return 2.0 * lambda * p + v - innovation_variance(market, pbar(p)); };

  FilterVarianceCurve out;
  out.T = T;
  out.t = uniform_grid(T, steps);
  out.P.resize(steps + 1);
  out.Pbar.resize(steps + 1);

  const double dt = T / steps;
  double p = m.p0;
  out.P[0] = p;
  out.Pbar[0] = pbar(p);
  for (int i = 0; i < steps; ++i) {
    const double k1 = rhs(p);
    const double k2 = rhs(p + 0.5 * dt * k1);
    const double k3 = rhs(p + 0.5 * dt * k2);
    const double k4 = rhs(p + dt * k3);
    p += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(p) || p < -1e-12) {
      throw NumericalError("NegativeVariance",
                           "filter variance became negative at t = " + std::to_string(out.t[i + 1]));
    }
    out.P[i + 1] = p;
    out.Pbar[i + 1] = pbar(p);
  }
  return out;
}

OdeGrid solve_partial_info(const Market& market, const PreferenceSpec& pref,
                           const FilterVarianceCurve& variance, int steps) {
  check_steps(steps, variance.T);
  check_crra(market, pref);
  if (variance.size() != static_cast<std::size_t>(2 * steps + 1)) {
    throw ValidationError("ValidationError", "variance curve must have 2*steps+1 nodes");
  }

  const Riccati sys(market, pref);
  // Coefficients at every node of the doubled grid, indexed in forward time.
  std::vector<Coefficients> coef;
  coef.reserve(variance.size());
  for (std::size_t i = 0; i < variance.size(); ++i) {
    const Eigen::RowVectorXd& pb = variance.Pbar[i];
    coef.push_back(sys.at(pb.transpose(), innovation_variance(market, pb)));
  }

  const double T = variance.T;
  OdeGrid grid;
  grid.kind = SystemKind::Partial;
  grid.delta = pref.delta;
  grid.epsilon = pref.epsilon;
  grid.T = T;
  grid.t = uniform_grid(T, steps);
  grid.f.assign(steps + 1, 0.0);
  grid.g.assign(steps + 1, 0.0);
  grid.h.assign(steps + 1, 0.0);

  const double ds = T / steps;
  std::array<double, 3> y{0.0, 0.0, 0.0};
  for (int j = 0; j < steps; ++j) {
    const int hi = 2 * (steps - j);  // doubled-grid index of t = T - j ds
    y = sys.step(y, ds, coef[hi], coef[hi - 1], coef[hi - 2]);
    store(grid, steps - j - 1, y);
  }
  return grid;
}

OdeGrid solve_partial_info(const Market& market, const PreferenceSpec& pref, double T, int steps) {
  check_steps(steps, T);
  const auto variance = solve_filter_variance(market, T, 2 * steps);
  return solve_partial_info(market, pref, variance, steps);
}

namespace {

struct InformationTerms {
  std::vector<double> P, denom, tail;
};

InformationTerms information_terms(const OdeGrid& full, const FilterVarianceCurve& variance,
                                   const Market& market, const PreferenceSpec& pref) {
  const std::size_t n = full.size();
  std::size_t stride = 0;
  if (variance.size() == n) {
    stride = 1;
  } else if (n >= 2 && variance.size() == 2 * (n - 1) + 1) {
    stride = 2;
  } else {
    throw ValidationError("ValidationError", "variance curve grid is not compatible");
  }

  const auto risk = effective_risk(market, pref);
  const Eigen::LLT<Eigen::MatrixXd> llt(risk.thetaHat);

  InformationTerms out;
  out.P.resize(n);
  out.denom.resize(n);
  out.tail.assign(n, 0.0);
  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.P[i] = variance.P[i * stride];
    out.denom[i] = 1.0 - out.P[i] * full.f[i];
    if (!(out.denom[i] > kBarrierTolerance)) {
      throw NumericalError("SingularTransform",
                           "1 - P f is not positive at t = " + std::to_string(full.t[i]));
    }
    const Eigen::VectorXd w = market.cross * full.f[i] + market.model.a;
    integrand[i] = out.P[i] / out.denom[i] * w.dot(llt.solve(w));
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    out.tail[i] =
        out.tail[i + 1] + 0.5 * (integrand[i] + integrand[i + 1]) * (full.t[i + 1] - full.t[i]);
  }
  return out;
}

}  // namespace

OdeGrid partial_from_full(const OdeGrid& full, const FilterVarianceCurve& variance,
                          const Market& market, const PreferenceSpec& pref) {
  check_crra(market, pref);
  const auto terms = information_terms(full, variance, market, pref);
  const double k = 1.0 - pref.delta;

  OdeGrid out = full;
  out.kind = SystemKind::Partial;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const double d = terms.denom[i];
    out.f[i] = full.f[i] / d;
    out.g[i] = full.g[i] / d;
    out.h[i] = full.h[i] - 0.5 * std::log(d) + 0.5 * full.g[i] * full.g[i] * terms.P[i] / d -
               0.5 * k * terms.tail[i];
  }
  return out;
}

double information_integral(const OdeGrid& full, const FilterVarianceCurve& variance,
                            const Market& market, const PreferenceSpec& pref, double from) {
  check_crra(market, pref);
  const auto terms = information_terms(full, variance, market, pref);
  return lerp_uniform(full.t, terms.tail, from);
}

double LogCoefficients::f(double t) const {
  const double tau = T - t;
  return A * std::expm1(2.0 * lambda * tau) / (2.0 * lambda);
}

double LogCoefficients::g(double t) const {
  const double tau = T - t;
  const double e1 = std::expm1(lambda * tau);
  return B * e1 / lambda + beta * A / (2.0 * lambda * lambda) * e1 * e1;
}

double LogCoefficients::h(double t) const {
  const double tau = T - t;
  const double e1 = std::expm1(lambda * tau) / lambda;
  const double e2 = std::expm1(2.0 * lambda * tau) / (2.0 * lambda);
  const double l2 = lambda * lambda;
  return (r + 0.5 * C) * tau + beta * B / lambda * (e1 - tau) +
         beta * beta * A / (2.0 * l2) * (e2 - 2.0 * e1 + tau) +
         0.5 * sigmaY * sigmaY * A / (2.0 * lambda) * (e2 - tau);
}

double LogCoefficients::h_tilde(double t, const FilterVarianceCurve& variance,
                                LogForm form) const {
  const double tau = T - t;
  const double phi = std::expm1(2.0 * lambda * tau);
  const double intP = variance.integral_P(t);
  const double Pt = variance.P_at(t);
  if (form == LogForm::AsPrinted) return h(t) + 0.5 * A * (intP - Pt * phi / 2.0);
  return h(t) - 0.5 * A * (intP - Pt * phi / (2.0 * lambda));
}

LogCoefficients log_closed_forms(const Market& market, const PreferenceSpec& pref, double T) {
  const auto& m = market.model;
  if (std::abs(m.lambda) < 1e-12) {
    throw ValidationError("LambdaZero", "log closed forms need a nonzero mean reversion");
  }
  const auto risk = effective_risk(market, pref);
  const Eigen::LLT<Eigen::MatrixXd> llt(risk.thetaLog);
  const Eigen::VectorXd qa = llt.solve(m.a);
  LogCoefficients lc;
  lc.A = m.a.dot(qa);
  lc.B = market.excess.dot(qa);
  lc.C = market.excess.dot(llt.solve(market.excess));
  lc.lambda = m.lambda;
  lc.beta = m.beta;
  lc.sigmaY = m.sigmaY;
  lc.r = m.r;
  lc.T = T;
  return lc;
}

OdeGrid tabulate_log(const LogCoefficients& lc, int steps) {
  OdeGrid grid;
  grid.kind = SystemKind::Log;
  grid.delta = 1.0;
  grid.T = lc.T;
  grid.t = uniform_grid(lc.T, steps);
  for (double t : grid.t) {
    grid.f.push_back(lc.f(t));
    grid.g.push_back(lc.g(t));
    grid.h.push_back(lc.h(t));
  }
  return grid;
}

IntegratedMoments ou_moments(const Market& market, double t, double T, double x, MomentMode mode,
                             const FilterVarianceCurve* variance) {
  const auto& m = market.model;
  const double lambda = m.lambda;
  if (std::abs(lambda) < 1e-12) {
    throw ValidationError("LambdaZero", "moment formulas need a nonzero mean reversion");
  }
  const double tau = T - t;
  const double c = m.beta / lambda;
  const double e1 = std::expm1(lambda * tau) / lambda;
  const double e2 = std::expm1(2.0 * lambda * tau) / (2.0 * lambda);

  IntegratedMoments out;
  out.first = (x + c) * e1 - c * tau;
  out.second = (x + c) * (x + c) * e2 - 2.0 * c * (x + c) * e1 + c * c * tau;

  if (mode == MomentMode::Latent) {
    out.second += m.sigmaY * m.sigmaY / (2.0 * lambda) * (e2 - tau);
    return out;
  }
  if (variance == nullptr) {
    throw ValidationError("ValidationError", "filtered moments need the filter variance curve");
  }
  if (std::abs(variance->T - T) > 1e-12) {
    throw ValidationError("ValidationError", "variance curve horizon differs from T");
  }
  std::vector<double> w(variance->size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double q = innovation_variance(market, variance->Pbar[i]);
    w[i] = q * std::expm1(2.0 * lambda * (T - variance->t[i])) / (2.0 * lambda);
  }
  out.second += trapezoid_tail(variance->t, w, t);
  return out;
}

void write_grid_csv(const OdeGrid& grid, std::ostream& os) {
  os << "t,f,g,h\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << fmt17(grid.t[i]) << ',' << fmt17(grid.f[i]) << ',' << fmt17(grid.g[i]) << ','
       << fmt17(grid.h[i]) << '\n';
  }
}

}  // namespace ppi
