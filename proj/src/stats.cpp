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
#include "ppi/stats.hpp"

#include <algorithm>
#include <cmath>

#include "ppi/errors.hpp"

namespace ppi {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("EmptySample", "quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

namespace {

struct Moments {
  double mean = 0.0;
  double m2 = 0.0;  // central, divided by N
  double m4 = 0.0;
};

Moments central_moments(std::span<const double> x) {
  CompensatedSum s;
  for (double v : x) s.add(v);
  Moments out;
  const double n = static_cast<double>(x.size());
  out.mean = s.value() / n;
  CompensatedSum s2, s4;
  for (double v : x) {
    const double d = v - out.mean;
    const double d2 = d * d;
    s2.add(d2);
    s4.add(d2 * d2);
  }
  out.m2 = s2.value() / n;
  out.m4 = s4.value() / n;
  return out;
}

}  // namespace

SummaryStats summary_stats(std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("EmptySample", "summary of an empty sample");
  const auto mom = central_moments(samples);
  const double n = static_cast<double>(samples.size());

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  SummaryStats out;
  out.mean = mom.mean;
  out.variance = samples.size() > 1 ? mom.m2 * n / (n - 1.0) : 0.0;
  out.q05 = quantile_sorted(sorted, 0.05);
  out.q50 = quantile_sorted(sorted, 0.50);
  out.q90 = quantile_sorted(sorted, 0.90);
  return out;
}

SummaryErrors summary_errors(std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("EmptySample", "summary of an empty sample");
  const auto mom = central_moments(samples);
  const std::size_t N = samples.size();
  const double n = static_cast<double>(N);

  SummaryErrors out;
  if (N < 2) return out;
  const double var = mom.m2 * n / (n - 1.0);
  out.mean = std::sqrt(var / n);
  out.variance = std::sqrt(std::max(mom.m4 - var * var * (n - 3.0) / (n - 1.0), 0.0) / n);

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  // Half-width of the one-sigma binomial interval on the order-statistic index.
  auto qerr = [&](double p) {
    const double half = std::sqrt(p * (1.0 - p) / n);
    const double lo = quantile_sorted(sorted, std::max(p - half, 0.0));
    const double hi = quantile_sorted(sorted, std::min(p + half, 1.0));
    return 0.5 * (hi - lo);
  };
  out.q05 = qerr(0.05);
  out.q50 = qerr(0.50);
  out.q90 = qerr(0.90);
  return out;
}

}  // namespace ppi
