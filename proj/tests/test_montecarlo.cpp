#include <cmath>
#include <numeric>

#include <doctest.h>

#include "deadrelu/bounds.hpp"
#include "deadrelu/montecarlo.hpp"

using namespace deadrelu;

namespace {

NetworkSetup he(int n, int k, BiasMode mode = BiasMode::ZeroBias) { return {n, k, InitScheme::he(), mode}; }

}  // namespace

TEST_CASE("one-wide deep networks collapse inside the bounds") {
  const Estimate e = estimate_alive_prob(he(1, 64), 1024, 1024, SeedSpec{1, "mc"});
  const double slack = e.ci_high - e.ci_low;
  CHECK(e.p_hat <= upper_bound(1, 64, BiasMode::ZeroBias) + slack);
  CHECK(e.p_hat >= lower_bound(1, 64) - slack);
  CHECK(e.p_hat < 0.01);
}

TEST_CASE("single wide layers are always alive") {
  const Estimate e = estimate_alive_prob(he(8, 1), 1024, 512, SeedSpec{2, "mc"});
  CHECK(e.p_hat == 1.0);
  CHECK(e.successes == 512);
}

TEST_CASE("a single trial gives a zero-one estimate with a wide interval") {
  const Estimate e = estimate_alive_prob(he(2, 3), 16, 1, SeedSpec{3, "mc"});
  CHECK((e.p_hat == 0.0 || e.p_hat == 1.0));
  CHECK(e.ci_high - e.ci_low > 0.5);
}

TEST_CASE("single point survival matches the closed form") {
  Vector x(2);
  x << 0.3, -1.7;
  const Estimate e = estimate_point_alive_prob(he(2, 3), x, 100000, SeedSpec{4, "mc"}).at_level(0.99);
  CHECK(e.ci_low <= 0.421875);
  CHECK(0.421875 <= e.ci_high);

  const Estimate one = estimate_point_alive_prob(he(1, 1), Vector::Constant(1, -2.0), 100000, SeedSpec{5, "mc"});
  CHECK(one.at_level(0.99).ci_low <= 0.5);
  CHECK(0.5 <= one.at_level(0.99).ci_high);
}

TEST_CASE("point outcomes are invariant under positive scaling") {
  Vector x(3);
  x << 1.0, -0.25, 2.0;
  const SeedSpec seed{6, "cone"};
  CHECK(point_alive_outcomes(he(3, 5), x, 5000, seed) == point_alive_outcomes(he(3, 5), 2.0 * x, 5000, seed));
}

TEST_CASE("the origin is rejected for zero-bias point estimates") {
  CHECK_THROWS_AS(estimate_point_alive_prob(he(2, 2), Vector::Zero(2), 10, SeedSpec{}), InvalidInput);
  CHECK_NOTHROW(estimate_point_alive_prob(he(2, 2, BiasMode::FreeBias), Vector::Zero(2), 10, SeedSpec{}));
  CHECK_THROWS_AS(estimate_point_alive_prob(he(2, 2), Vector::Ones(3), 10, SeedSpec{}), InvalidInput);
}

TEST_CASE("a random neuron kills a fixed point half the time") {
  Vector x(3);
  x << 0.5, 2.0, -1.0;
  const Estimate e =
      estimate_neuron_death_prob(3, InitScheme::he(), BiasMode::FreeBias, x, 100000, SeedSpec{7, "gamma"});
  CHECK(e.at_level(0.99).ci_low <= 0.5);
  CHECK(0.5 <= e.at_level(0.99).ci_high);

  const Estimate scalar = estimate_neuron_death_prob(1, InitScheme::he(), BiasMode::ZeroBias, Vector::Ones(1), 100000,
                                                     SeedSpec{8, "gamma"});
  CHECK(scalar.at_level(0.99).ci_low <= 0.5);
  CHECK(0.5 <= scalar.at_level(0.99).ci_high);

  CHECK(neuron_kills(-x, 0.0, x));
  CHECK_FALSE(neuron_kills(x, 0.0, x));
  CHECK(neuron_kills(Vector::Zero(3), 0.0, x));
}

TEST_CASE("layer moments follow the definition on a fixed network") {
  Matrix pts(4, 2);
  pts << 1.0, -2.0, 3.0, 0.5, -1.0, 4.0, 2.0, 2.0;
  const ReluNetwork ident({LayerParams{Matrix::Identity(2, 2), Vector::Zero(2)}}, BiasMode::ZeroBias);
  const auto moments = layer_moments(ident, DataBatch(pts));
  REQUIRE(moments.size() == 1);
  const Matrix rect = pts.cwiseMax(0.0);
  double sq_sigma = 0.0, sq_lambda = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double mean = rect.col(c).mean();
    sq_lambda += mean * mean;
    sq_sigma += (rect.col(c).array() - mean).square().mean();
  }
  CHECK(moments[0].alive);
  CHECK(moments[0].sq_sigma == doctest::Approx(sq_sigma).epsilon(1e-15));
  CHECK(moments[0].sq_lambda == doctest::Approx(sq_lambda).epsilon(1e-15));
  const double pre_var = ((pts.col(0).array() - pts.col(0).mean()).square().mean() +
                          (pts.col(1).array() - pts.col(1).mean()).square().mean()) /
                         2.0;
  CHECK(moments[0].pre_variance == doctest::Approx(pre_var).epsilon(1e-15));
}

TEST_CASE("first-layer pre-activation variance is n times the parameter variance") {
  const VarianceReport r = variance_report(he(4, 1), 256, 100000, SeedSpec{9, "prevar"});
  CHECK(r.layers[0].mean_pre_variance == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("variance report structure") {
  const NetworkSetup setup = he(4, 12);
  const SeedSpec seed{10, "vr"};
  const VarianceReport r = variance_report(setup, 128, 400, seed);
  REQUIRE(r.layers.size() == 12);
  double running = 0.0;
  for (std::size_t j = 0; j < r.layers.size(); ++j) {
    const VarianceLayer& l = r.layers[j];
    CHECK(l.mean_sq_sigma >= 0.0);
    CHECK(l.mean_sq_lambda >= 0.0);
    CHECK(l.normalized >= 0.0);
    if (j > 0) CHECK(l.alive_trials <= r.layers[j - 1].alive_trials);
    running += l.normalized;
    CHECK(l.partial_sigma_sum == doctest::Approx(running));
  }
  // The alive count of the last layer is the network-alive estimate.
  CHECK(r.final_alive().successes == estimate_alive_prob(setup, 128, 400, seed).successes);
  // Raw output variance shrinks with depth under He initialization.
  CHECK(r.layers.back().mean_sq_sigma < r.layers.front().mean_sq_sigma);
  CHECK_THROWS_AS(variance_report(setup, 1, 10, seed), InvalidInput);
}

TEST_CASE("neuron variance identity") {
  const VarianceIdentity v = neuron_variance_identity(2, InitScheme::he(), 1024, 20000, SeedSpec{11, "identity"});
  CHECK(std::abs(v.residual()) <= 0.05 * v.rhs_half_pre);
  CHECK(v.pre_variance == doctest::Approx(v.expected_pre_variance).epsilon(0.03));
  CHECK(std::abs(v.pre_lambda_mean) <= 4.0 * v.pre_lambda_stderr);

  const VarianceIdentity tiny = neuron_variance_identity(2, InitScheme::normal(1e-20), 64, 100, SeedSpec{12, "identity"});
  CHECK(tiny.lhs < 1e-18);
  CHECK(tiny.rhs_half_pre < 1e-18);
  CHECK(tiny.rhs_lambda_sq < 1e-18);
}

TEST_CASE("living fractions under the three initializations") {
  const NetworkSetup setup = he(2, 4);
  const SeedSpec seed{13, "alpha"};
  const auto iid = living_fraction_stats(setup, InitWrapper::Iid, 1024, 1024, seed);
  const auto flip = living_fraction_stats(setup, InitWrapper::SignFlip, 1024, 1024, seed);
  const auto center = living_fraction_stats(setup, InitWrapper::BatchCenter, 1024, 1024, seed);
  CHECK(std::abs(iid.summary.mean - lower_bound(2, 4)) <= 3.0 * iid.summary.standard_error);
  CHECK(flip.summary.mean > iid.summary.mean);
  CHECK(flip.summary.min >= 1.0 / 16.0);
  CHECK(flip.zero_preactivation_trials == 0);
  CHECK(center.network_alive.p_hat >= 0.99);
  CHECK(std::abs(center.summary.mean - iid.summary.mean) <=
        3.0 * std::hypot(center.summary.standard_error, iid.summary.standard_error));
  for (std::size_t t = 0; t < flip.fractions.size(); ++t) CHECK(flip.fractions[t] >= 1.0 / 16.0);
}

TEST_CASE("E2 transitions become rarer with depth") {
  const auto tally = event_frequencies(he(3, 48), 256, 2000, SeedSpec{14, "events"});
  REQUIRE(tally.size() == 48);
  auto e2_rate = [&](std::size_t from, std::size_t to) {
    std::int64_t e2 = 0, all = 0;
    for (std::size_t j = from; j < to; ++j) {
      e2 += tally[j].partial_death;
      all += tally[j].conditioned();
    }
    return static_cast<double>(e2) / static_cast<double>(all);
  };
  CHECK(tally[0].conditioned() == 2000);
  const double early = e2_rate(0, 8), middle = e2_rate(8, 24), late = e2_rate(24, 48);
  CHECK(early >= middle);
  CHECK(middle >= late);
}

TEST_CASE("estimators are independent of the thread count") {
  const SeedSpec seed{15, "threads"};
  CHECK(alive_outcomes(he(3, 8), 64, 300, seed, {1, 0.95}) == alive_outcomes(he(3, 8), 64, 300, seed, {4, 0.95}));
  const auto a = living_fraction_stats(he(2, 5), InitWrapper::SignFlip, 64, 200, seed, {1, 0.95});
  const auto b = living_fraction_stats(he(2, 5), InitWrapper::SignFlip, 64, 200, seed, {3, 0.95});
  CHECK(a.fractions == b.fractions);
  const VarianceReport va = variance_report(he(3, 6), 64, 200, seed, {1, 0.95});
  const VarianceReport vb = variance_report(he(3, 6), 64, 200, seed, {5, 0.95});
  for (std::size_t j = 0; j < va.layers.size(); ++j) {
    CHECK(va.layers[j].normalized == vb.layers[j].normalized);
    CHECK(va.layers[j].mean_sq_sigma == vb.layers[j].mean_sq_sigma);
  }
}

TEST_CASE("convolutional estimates") {
  const ConvSetup single{1, 1, 8, 1, InitScheme::he(), BiasMode::ZeroBias};
  CHECK(estimate_conv_alive_prob(single, 1024, 64, SeedSpec{16, "conv"}).p_hat == 1.0);
  const ConvSetup deep{1, 1, 8, 32, InitScheme::he(), BiasMode::ZeroBias};
  const Estimate e = estimate_conv_alive_prob(deep, 16, 512, SeedSpec{17, "conv"});
  CHECK(e.p_hat <= conv_bounds(1, 1, 32).upper + (e.ci_high - e.ci_low));
}
