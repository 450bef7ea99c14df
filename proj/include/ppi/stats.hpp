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

#include <span>
#include <vector>

namespace ppi {

struct SummaryStats {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  double q05 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
};

/// Monte Carlo standard errors of the entries of SummaryStats.
struct SummaryErrors {
  double mean = 0.0;
  double variance = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Linear interpolation between order statistics at position p (n - 1) of the
/// sorted sample. `sorted` must be ascending and nonempty.
double quantile_sorted(std::span<const double> sorted, double p);

/// Mean, unbiased variance and the 5/50/90 percent quantiles.
/// Errors: EmptySample.
SummaryStats summary_stats(std::span<const double> samples);

/// Standard errors: sd / sqrt(N) for the mean, the fourth-moment formula for
/// the variance and an order-statistic interval for the quantiles.
SummaryErrors summary_errors(std::span<const double> samples);

}  // namespace ppi
