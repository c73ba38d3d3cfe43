#pragma once

#include <cstdint>
#include <span>

namespace deadrelu {

struct Interval {
  double low = 0.0;
  double high = 1.0;

  bool contains(double x) const { return low <= x && x <= high; }
  bool intersects(double lo, double hi) const { return low <= hi && lo <= high; }
};

/// Two-sided standard normal quantile z with P(|Z| <= z) = level.
double two_sided_z(double level);

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double level = 0.95);

/// Monte Carlo probability estimate.
struct Estimate {
  double p_hat = 0.0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double ci_level = 0.95;

  /// Same counts, interval recomputed at another level.
  Estimate at_level(double level) const;
  double standard_error() const;
};

Estimate make_estimate(std::int64_t successes, std::int64_t trials, double level = 0.95);

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> values);

/// Sample mean and standard error of the mean.
struct MeanSummary {
  double mean = 0.0;
  double standard_error = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::int64_t count = 0;
};

MeanSummary summarize(std::span<const double> values);

}  // namespace deadrelu
