#include "deadrelu/montecarlo.hpp"

#include <algorithm>
#include <numeric>

#include "deadrelu/parallel.hpp"

namespace deadrelu {

namespace {

void require_counts(std::int64_t trials, int batch_size) {
  if (trials < 1) throw InvalidInput("trial count must be positive");
  if (batch_size < 1) throw InvalidInput("batch size must be positive");
}

void require_setup(const NetworkSetup& setup) {
  if (setup.width < 1 || setup.depth < 1) throw InvalidInput("network width and depth must be positive");
}

Estimate count_estimate(const std::vector<std::uint8_t>& outcomes, double level) {
  const auto successes = std::count(outcomes.begin(), outcomes.end(), std::uint8_t{1});
  return make_estimate(successes, static_cast<std::int64_t>(outcomes.size()), level);
}

struct TrialDraw {
  ReluNetwork network;
  DataBatch batch;
};

TrialDraw draw_trial(const NetworkSetup& setup, int batch_size, const SeedSpec& seed, std::int64_t t) {
  const std::uint64_t trial_seed = seed.seed_for(static_cast<std::uint64_t>(t));
  Engine engine = make_engine(trial_seed);
  ReluNetwork net = sample_network(setup.width, setup.depth, setup.scheme, setup.bias_mode, engine);
  DataBatch batch(sample_standard_normal(batch_size, setup.width, engine), GeneratorSpec{"standard_normal", trial_seed});
  return {std::move(net), std::move(batch)};
}

}  // namespace

std::vector<std::uint8_t> alive_outcomes(const NetworkSetup& setup, int batch_size, std::int64_t trials,
                                         const SeedSpec& seed, const RunOptions& options) {
  require_setup(setup);
  require_counts(trials, batch_size);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(trials), 0);
  parallel_for(trials, options.threads, [&](std::int64_t t) {
    const TrialDraw draw = draw_trial(setup, batch_size, seed, t);
    out[static_cast<std::size_t>(t)] = alive_profile(draw.network, draw.batch.points()).back() > 0 ? 1 : 0;
  });
  return out;
}

Estimate estimate_alive_prob(const NetworkSetup& setup, int batch_size, std::int64_t trials, const SeedSpec& seed,
                             const RunOptions& options) {
  return count_estimate(alive_outcomes(setup, batch_size, trials, seed, options), options.ci_level);
}

std::vector<std::uint8_t> point_alive_outcomes(const NetworkSetup& setup, const Vector& x, std::int64_t trials,
                                               const SeedSpec& seed, const RunOptions& options) {
  require_setup(setup);
  require_counts(trials, 1);
  if (x.size() != setup.width) throw InvalidInput("point dimension does not match network width");
  if (!x.allFinite()) throw InvalidInput("point has non-finite coordinates");
  if (setup.bias_mode == BiasMode::ZeroBias && x.isZero(0.0)) {
    throw InvalidInput("the origin is dead in every zero-bias network; pick a nonzero point");
  }
  const Matrix point = x.transpose();
  std::vector<std::uint8_t> out(static_cast<std::size_t>(trials), 0);
  parallel_for(trials, options.threads, [&](std::int64_t t) {
    const ReluNetwork net =
        sample_network(setup.width, setup.depth, setup.scheme, setup.bias_mode, seed, static_cast<std::uint64_t>(t));
    out[static_cast<std::size_t>(t)] = alive_profile(net, point).back() > 0 ? 1 : 0;
  });
  return out;
}

Estimate estimate_point_alive_prob(const NetworkSetup& setup, const Vector& x, std::int64_t trials,
                                   const SeedSpec& seed, const RunOptions& options) {
  return count_estimate(point_alive_outcomes(setup, x, trials, seed, options), options.ci_level);
}

bool neuron_kills(const Vector& weights, double bias, const Vector& x) { return weights.dot(x) + bias <= 0.0; }

Estimate estimate_neuron_death_prob(int n, const InitScheme& scheme, BiasMode mode, const Vector& x,
                                    std::int64_t trials, const SeedSpec& seed, const RunOptions& options) {
  if (n < 1) throw InvalidInput("neuron fan-in must be positive");
  require_counts(trials, 1);
  if (x.size() != n) throw InvalidInput("point dimension does not match fan-in");
  if (x.isZero(0.0)) throw InvalidInput("point must be nonzero");
  const ParamDistribution dist = scheme.resolve(n);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(trials), 0);
  parallel_for(trials, options.threads, [&](std::int64_t t) {
    Engine engine = make_engine(seed.seed_for(static_cast<std::uint64_t>(t)));
    Vector a(n);
    for (int i = 0; i < n; ++i) a[i] = dist.sample(engine);
    const double b = mode == BiasMode::FreeBias ? dist.sample(engine) : 0.0;
    out[static_cast<std::size_t>(t)] = neuron_kills(a, b, x) ? 1 : 0;
  });
  return count_estimate(out, options.ci_level);
}

Estimate VarianceReport::final_alive(double level) const {
  if (layers.empty()) throw InvalidInput("empty variance report");
  return make_estimate(layers.back().alive_trials, trials, level);
}

std::vector<LayerMoments> layer_moments(const ReluNetwork& net, const DataBatch& batch) {
  if (batch.width() != net.width()) throw InvalidInput("batch width does not match network width");
  std::vector<LayerMoments> out;
  std::vector<std::uint8_t> alive(static_cast<std::size_t>(batch.size()), 1);
  Matrix input = batch.points();
  for (const auto& layer : net.layers()) {
    const Matrix pre = affine(layer, input);
    LayerMoments moments;
    const Eigen::RowVectorXd pre_mean = pre.colwise().mean();
    moments.pre_variance = (pre.rowwise() - pre_mean).array().square().colwise().mean().mean();

    int living = 0;
    for (Eigen::Index m = 0; m < pre.rows(); ++m) {
      auto& a = alive[static_cast<std::size_t>(m)];
      if (a && killed(pre.row(m))) a = 0;
      living += a;
    }
    input = pre.cwiseMax(0.0);
    moments.alive = living > 0;
    if (moments.alive) {
      const Eigen::RowVectorXd lambda = input.colwise().mean();
      moments.sq_lambda = lambda.squaredNorm();
      moments.sq_sigma = (input.rowwise() - lambda).array().square().colwise().mean().sum();
    }
    out.push_back(moments);
    if (!moments.alive) break;
  }
  return out;
}

VarianceReport variance_report(const NetworkSetup& setup, int batch_size, std::int64_t trials, const SeedSpec& seed,
                               const RunOptions& options) {
  require_setup(setup);
  require_counts(trials, batch_size);
  if (batch_size < 2) throw InvalidInput("variance over data needs at least two points");

  std::vector<std::vector<LayerMoments>> samples(static_cast<std::size_t>(trials));
  parallel_for(trials, options.threads, [&](std::int64_t t) {
    const TrialDraw draw = draw_trial(setup, batch_size, seed, t);
    samples[static_cast<std::size_t>(t)] = layer_moments(draw.network, draw.batch);
  });

  VarianceReport report;
  report.trials = trials;
  report.batch_size = batch_size;
  double running = 0.0;
  for (std::size_t j = 0; j < static_cast<std::size_t>(setup.depth); ++j) {
    CompensatedSum sigma, lambda, ratio, pre;
    std::int64_t alive = 0, entered = 0, with_lambda = 0, missing = 0;
    for (const auto& trial : samples) {
      if (j >= trial.size()) continue;
      const LayerMoments& s = trial[j];
      ++entered;
      pre.add(s.pre_variance);
      if (!s.alive) continue;
      ++alive;
      sigma.add(s.sq_sigma);
      lambda.add(s.sq_lambda);
      if (s.sq_lambda > 0.0) {
        ++with_lambda;
        ratio.add(s.sq_sigma / s.sq_lambda);
      } else {
        ++missing;
      }
    }
    VarianceLayer layer;
    layer.alive_trials = alive;
    layer.missing_lambda = missing;
    if (alive > 0) {
      layer.mean_sq_sigma = sigma.value() / static_cast<double>(alive);
      layer.mean_sq_lambda = lambda.value() / static_cast<double>(alive);
    }
    if (with_lambda > 0) layer.normalized = ratio.value() / static_cast<double>(with_lambda);
    if (entered > 0) layer.mean_pre_variance = pre.value() / static_cast<double>(entered);
    running += layer.normalized;
    layer.partial_sigma_sum = running;
    report.layers.push_back(layer);
  }
  return report;
}

VarianceIdentity neuron_variance_identity(int n, const InitScheme& scheme, int batch_size, std::int64_t trials,
                                          const SeedSpec& seed, const RunOptions& options) {
  if (n < 1) throw InvalidInput("neuron fan-in must be positive");
  if (trials < 2) throw InvalidInput("variance identity needs at least two trials");
  if (batch_size < 2) throw InvalidInput("variance over data needs at least two points");
  const ParamDistribution dist = scheme.resolve(n);

  struct Sample {
    double out_variance, pre_variance, out_mean_sq, pre_mean;
  };
  std::vector<Sample> samples(static_cast<std::size_t>(trials));
  parallel_for(trials, options.threads, [&](std::int64_t t) {
    Engine engine = make_engine(seed.seed_for(static_cast<std::uint64_t>(t)));
    Vector a(n);
    for (int i = 0; i < n; ++i) a[i] = dist.sample(engine);
    const Matrix data = sample_standard_normal(batch_size, n, engine);
    const Eigen::ArrayXd pre = (data * a).array();
    const Eigen::ArrayXd out = pre.max(0.0);
    const double pre_mean = pre.mean();
    const double out_mean = out.mean();
    samples[static_cast<std::size_t>(t)] = {(out - out_mean).square().mean(), (pre - pre_mean).square().mean(),
                                            out_mean * out_mean, pre_mean};
  });

  std::vector<double> column(samples.size());
  auto mean_of = [&](double Sample::*field) {
    std::transform(samples.begin(), samples.end(), column.begin(), [&](const Sample& s) { return s.*field; });
    return summarize(column);
  };
  VarianceIdentity result;
  result.trials = trials;
  result.lhs = mean_of(&Sample::out_variance).mean;
  result.pre_variance = mean_of(&Sample::pre_variance).mean;
  result.rhs_half_pre = 0.5 * result.pre_variance;
  result.rhs_lambda_sq = mean_of(&Sample::out_mean_sq).mean;
  const MeanSummary lambda_tilde = mean_of(&Sample::pre_mean);
  result.pre_lambda_mean = lambda_tilde.mean;
  result.pre_lambda_stderr = lambda_tilde.standard_error;
  result.expected_pre_variance = n * dist.variance();
  return result;
}

std::string to_string(InitWrapper wrapper) {
  switch (wrapper) {
    case InitWrapper::Iid: return "iid";
    case InitWrapper::SignFlip: return "sign-flip";
    case InitWrapper::BatchCenter: return "batch-center";
  }
  return "?";
}

LivingFractionStats living_fraction_stats(const NetworkSetup& setup, InitWrapper wrapper, int batch_size,
                                          std::int64_t trials, const SeedSpec& seed, const RunOptions& options) {
  require_setup(setup);
  require_counts(trials, batch_size);
  std::vector<int> final_alive(static_cast<std::size_t>(trials), 0);
  std::vector<std::uint8_t> zero_case(static_cast<std::size_t>(trials), 0);
  parallel_for(trials, options.threads, [&](std::int64_t t) {
    const TrialDraw draw = draw_trial(setup, batch_size, seed, t);
    const auto slot = static_cast<std::size_t>(t);
    switch (wrapper) {
      case InitWrapper::Iid:
        final_alive[slot] = alive_profile(draw.network, draw.batch.points()).back();
        break;
      case InitWrapper::SignFlip: {
        const SignFlipResult flipped = sign_flip_init(draw.network, draw.batch);
        final_alive[slot] = flipped.final_alive;
        zero_case[slot] = flipped.zero_preactivation ? 1 : 0;
        break;
      }
      case InitWrapper::BatchCenter:
        final_alive[slot] = alive_profile(batch_center_init(draw.network, draw.batch), draw.batch.points()).back();
        break;
    }
  });

  LivingFractionStats stats;
  stats.fractions.reserve(final_alive.size());
  std::int64_t alive_networks = 0;
  for (int count : final_alive) {
    stats.fractions.push_back(static_cast<double>(count) / static_cast<double>(batch_size));
    if (count > 0) ++alive_networks;
  }
  stats.summary = summarize(stats.fractions);
  stats.network_alive = make_estimate(alive_networks, trials, options.ci_level);
  stats.zero_preactivation_trials = std::count(zero_case.begin(), zero_case.end(), std::uint8_t{1});
  return stats;
}

std::vector<EventTally> event_frequencies(const NetworkSetup& setup, int batch_size, std::int64_t trials,
                                          const SeedSpec& seed, const RunOptions& options) {
  require_setup(setup);
  require_counts(trials, batch_size);
  std::vector<std::vector<int>> profiles(static_cast<std::size_t>(trials));
  parallel_for(trials, options.threads, [&](std::int64_t t) {
    const TrialDraw draw = draw_trial(setup, batch_size, seed, t);
    profiles[static_cast<std::size_t>(t)] = alive_profile(draw.network, draw.batch.points());
  });
  std::vector<EventTally> tally(static_cast<std::size_t>(setup.depth));
  for (const auto& profile : profiles) {
    int prev = batch_size;
    for (std::size_t j = 0; j < profile.size() && prev > 0; ++j) {
      switch (classify_event(prev, profile[j])) {
        case LayerEvent::AllSurvive: ++tally[j].all_survive; break;
        case LayerEvent::PartialDeath: ++tally[j].partial_death; break;
        case LayerEvent::TotalDeath: ++tally[j].total_death; break;
      }
      prev = profile[j];
    }
  }
  return tally;
}

std::vector<std::uint8_t> conv_alive_outcomes(const ConvSetup& setup, int batch_size, std::int64_t trials,
                                              const SeedSpec& seed, const RunOptions& options) {
  require_counts(trials, batch_size);
  if (setup.depth < 1) throw InvalidInput("depth must be positive");
  const int flat = setup.channels * setup.spatial_side * setup.spatial_side;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(trials), 0);
  parallel_for(trials, options.threads, [&](std::int64_t t) {
    Engine engine = make_engine(seed.seed_for(static_cast<std::uint64_t>(t)));
    const auto layers = sample_conv_network(setup.channels, setup.kernel_side, setup.spatial_side, setup.depth,
                                            setup.scheme, setup.bias_mode, engine);
    const Matrix images = sample_standard_normal(batch_size, flat, engine);
    out[static_cast<std::size_t>(t)] = conv_alive_profile(layers, images).back() > 0 ? 1 : 0;
  });
  return out;
}

Estimate estimate_conv_alive_prob(const ConvSetup& setup, int batch_size, std::int64_t trials, const SeedSpec& seed,
                                  const RunOptions& options) {
  return count_estimate(conv_alive_outcomes(setup, batch_size, trials, seed, options), options.ci_level);
}

}  // namespace deadrelu
