#include <cmath>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <doctest.h>

#include "deadrelu/network.hpp"
#include "deadrelu/stats.hpp"

using namespace deadrelu;

namespace {

// The Wilson bounds are the two roots of the score equation
// |phat - p| = z sqrt(p (1 - p) / n); solved here by bisection.
std::pair<double, double> score_roots(std::int64_t s, std::int64_t n, double z) {
  const double phat = static_cast<double>(s) / static_cast<double>(n);
  auto excess = [&](double p) { return std::abs(phat - p) - z * std::sqrt(p * (1.0 - p) / static_cast<double>(n)); };
  auto solve = [&](double inside, double outside) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (inside + outside);
      (excess(mid) > 0.0 ? outside : inside) = mid;
    }
    return 0.5 * (inside + outside);
  };
  return {s == 0 ? 0.0 : solve(phat, 0.0), s == n ? 1.0 : solve(phat, 1.0)};
}

}  // namespace

TEST_CASE("normal quantiles") {
  CHECK(two_sided_z(0.95) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(two_sided_z(0.99) == doctest::Approx(2.5758293035489004).epsilon(1e-14));
  CHECK_THROWS_AS(two_sided_z(1.0), InvalidInput);
}

TEST_CASE("wilson interval at one half") {
  const Interval ci = wilson_interval(512, 1024, 0.95);
  CHECK(std::abs(ci.low - 0.4694) <= 5e-4);
  CHECK(std::abs(ci.high - 0.5306) <= 5e-4);

  // Cross-check against the exact binomial tails: at the interval ends the
  // probability of a result at least as extreme is close to 2.5%.
  const boost::math::binomial_distribution<double> at_low(1024, ci.low);
  const boost::math::binomial_distribution<double> at_high(1024, ci.high);
  CHECK(std::abs(boost::math::cdf(boost::math::complement(at_low, 511)) - 0.025) < 0.004);
  CHECK(std::abs(boost::math::cdf(at_high, 512) - 0.025) < 0.004);
}

TEST_CASE("wilson boundaries") {
  CHECK(wilson_interval(0, 100, 0.95).low == 0.0);
  CHECK(wilson_interval(0, 100, 0.95).high > 0.0);
  CHECK(wilson_interval(100, 100, 0.95).high == 1.0);
  CHECK(wilson_interval(100, 100, 0.95).low < 1.0);
  const Interval one = wilson_interval(1, 1, 0.95);
  CHECK(one.low < 0.3);
  CHECK(one.high == 1.0);
}

TEST_CASE("wilson matches the score-equation oracle") {
  for (std::int64_t n : {1, 7, 100, 1024, 100000}) {
    for (std::int64_t s : {std::int64_t{0}, std::int64_t{1}, n / 3, n / 2, n - 1, n}) {
      if (s < 0 || s > n) continue;
      for (double level : {0.9, 0.95, 0.99}) {
        const Interval ci = wilson_interval(s, n, level);
        const auto [lo, hi] = score_roots(s, n, two_sided_z(level));
        CAPTURE(n);
        CAPTURE(s);
        CHECK(ci.low == doctest::Approx(lo).epsilon(1e-9));
        CHECK(ci.high == doctest::Approx(hi).epsilon(1e-9));
        const double p = static_cast<double>(s) / static_cast<double>(n);
        CHECK(ci.low <= p);
        CHECK(p <= ci.high);
      }
    }
  }
}

TEST_CASE("wilson rejects invalid counts") {
  CHECK_THROWS_AS(wilson_interval(3, 2, 0.95), InvalidInput);
  CHECK_THROWS_AS(wilson_interval(-1, 2, 0.95), InvalidInput);
  CHECK_THROWS_AS(wilson_interval(0, 0, 0.95), InvalidInput);
  CHECK_THROWS_AS(wilson_interval(1, 2, 0.0), InvalidInput);
}

TEST_CASE("estimates") {
  const Estimate e = make_estimate(3, 4, 0.95);
  CHECK(e.p_hat == 0.75);
  CHECK(e.ci_low <= e.p_hat);
  CHECK(e.p_hat <= e.ci_high);
  const Estimate wide = e.at_level(0.99);
  CHECK(wide.ci_low < e.ci_low);
  CHECK(wide.ci_high > e.ci_high);
  CHECK(e.standard_error() == doctest::Approx(std::sqrt(0.75 * 0.25 / 4)));
}

TEST_CASE("compensated summation") {
  std::vector<double> values{1e16, 1.0, -1e16, 1.0};
  CHECK(compensated_sum(values) == 2.0);
  std::vector<double> many(100000, 0.1);
  CHECK(compensated_sum(many) == doctest::Approx(10000.0).epsilon(1e-15));
  const MeanSummary s = summarize(std::vector<double>{1, 2, 3, 4});
  CHECK(s.mean == 2.5);
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  CHECK(s.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}
