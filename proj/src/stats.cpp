#include "deadrelu/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "deadrelu/network.hpp"

namespace deadrelu {

double two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("confidence level must lie in (0, 1)");
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 0.5 + 0.5 * level);
}

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double level) {
  if (trials < 1) throw InvalidInput("wilson interval needs at least one trial");
  if (successes < 0 || successes > trials) throw InvalidInput("successes must lie in [0, trials]");
  const double z = two_sided_z(level);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Interval out{center - half, center + half};
  // The closed form touches the boundary exactly only up to rounding.
  if (successes == 0) out.low = 0.0;
  if (successes == trials) out.high = 1.0;
  out.low = std::clamp(out.low, 0.0, p);
  out.high = std::clamp(out.high, p, 1.0);
  return out;
}

Estimate make_estimate(std::int64_t successes, std::int64_t trials, double level) {
  const Interval ci = wilson_interval(successes, trials, level);
  Estimate e;
  e.successes = successes;
  e.trials = trials;
  e.p_hat = static_cast<double>(successes) / static_cast<double>(trials);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  e.ci_level = level;
  return e;
}

Estimate Estimate::at_level(double level) const { return make_estimate(successes, trials, level); }

double Estimate::standard_error() const {
  return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

MeanSummary summarize(std::span<const double> values) {
  MeanSummary s;
  s.count = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = compensated_sum(values) / n;
  CompensatedSum sq;
  for (double v : values) sq.add((v - s.mean) * (v - s.mean));
  if (values.size() > 1) s.standard_error = std::sqrt(sq.value() / (n - 1.0) / n);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

}  // namespace deadrelu
