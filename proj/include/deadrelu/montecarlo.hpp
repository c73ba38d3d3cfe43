#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deadrelu/init.hpp"
#include "deadrelu/network.hpp"
#include "deadrelu/random.hpp"
#include "deadrelu/stats.hpp"

namespace deadrelu {

/// Shape and distribution of the random networks an estimator draws.
struct NetworkSetup {
  int width = 1;
  int depth = 1;
  InitScheme scheme = InitScheme::he();
  BiasMode bias_mode = BiasMode::ZeroBias;
};

struct ConvSetup {
  int channels = 1;
  int kernel_side = 1;
  int spatial_side = 8;
  int depth = 1;
  InitScheme scheme = InitScheme::he();
  BiasMode bias_mode = BiasMode::ZeroBias;
};

/// Threads never change results; only ci_level does.
struct RunOptions {
  int threads = 0;
  double ci_level = 0.95;
};

// Every estimator seeds trial t with seed.seed_for(t). Within a trial the
// network is drawn first and the data second, from the same engine, so two
// estimators given the same SeedSpec see the same networks and data.

/// Per-trial network-alive indicators on fresh standard-normal batches of M points.
std::vector<std::uint8_t> alive_outcomes(const NetworkSetup& setup, int batch_size, std::int64_t trials,
                                         const SeedSpec& seed, const RunOptions& options = {});

Estimate estimate_alive_prob(const NetworkSetup& setup, int batch_size, std::int64_t trials, const SeedSpec& seed,
                             const RunOptions& options = {});

/// Per-trial indicators that the fixed point x survives the whole network.
std::vector<std::uint8_t> point_alive_outcomes(const NetworkSetup& setup, const Vector& x, std::int64_t trials,
                                               const SeedSpec& seed, const RunOptions& options = {});

Estimate estimate_point_alive_prob(const NetworkSetup& setup, const Vector& x, std::int64_t trials,
                                   const SeedSpec& seed, const RunOptions& options = {});

/// True when a . x + b <= 0.
bool neuron_kills(const Vector& weights, double bias, const Vector& x);

/// Probability that a single random neuron kills the fixed point x.
Estimate estimate_neuron_death_prob(int n, const InitScheme& scheme, BiasMode mode, const Vector& x,
                                    std::int64_t trials, const SeedSpec& seed, const RunOptions& options = {});

struct VarianceLayer {
  /// Trials whose network still has a living point after this layer.
  std::int64_t alive_trials = 0;
  /// Mean over those trials of ||sigma(F_j(x) | theta)||^2.
  double mean_sq_sigma = 0.0;
  /// Mean over those trials of ||lambda_j||^2.
  double mean_sq_lambda = 0.0;
  /// Mean of ||sigma||^2 / ||lambda||^2 over trials with lambda_j != 0.
  double normalized = 0.0;
  /// Alive trials skipped in `normalized` because lambda_j = 0.
  std::int64_t missing_lambda = 0;
  /// Running sum of `normalized` up to this layer.
  double partial_sigma_sum = 0.0;
  /// Mean per-neuron variance of the pre-activations, over trials alive on entry.
  double mean_pre_variance = 0.0;
};

struct VarianceReport {
  std::int64_t trials = 0;
  int batch_size = 0;
  std::vector<VarianceLayer> layers;

  /// Network-alive estimate at the final layer, identical to
  /// estimate_alive_prob() for the same arguments.
  Estimate final_alive(double level = 0.95) const;
};

/// Data-conditional statistics of one network on one batch, per layer.
/// Population (1/M) variances over all M points, dead points included.
struct LayerMoments {
  /// Some point survives this layer.
  bool alive = false;
  /// Mean over neurons of the pre-activation variance.
  double pre_variance = 0.0;
  /// ||sigma(F_j(x) | theta)||^2 and ||lambda_j||^2; zero when the network is dead.
  double sq_sigma = 0.0;
  double sq_lambda = 0.0;
};

/// Moments for each layer up to the first one that kills every point;
/// later layers are omitted.
std::vector<LayerMoments> layer_moments(const ReluNetwork& net, const DataBatch& batch);

/// Data-conditional variance statistics of every layer output.
VarianceReport variance_report(const NetworkSetup& setup, int batch_size, std::int64_t trials, const SeedSpec& seed,
                               const RunOptions& options = {});

/// Three sides of the single-neuron variance identity
///   E sigma^2(F) = 1/2 E sigma^2(F~) - E lambda^2
/// for a zero-bias neuron on standard-normal data.
struct VarianceIdentity {
  double lhs = 0.0;            ///< E_theta sigma^2(F(x) | theta)
  double rhs_half_pre = 0.0;   ///< 1/2 E_theta sigma^2(F~(x) | theta)
  double rhs_lambda_sq = 0.0;  ///< E_theta lambda^2
  double pre_variance = 0.0;   ///< E_theta sigma^2(F~(x) | theta)
  double expected_pre_variance = 0.0;  ///< n * parameter variance
  double pre_lambda_mean = 0.0;        ///< E_theta of the pre-activation data mean
  double pre_lambda_stderr = 0.0;
  std::int64_t trials = 0;

  double residual() const { return lhs - (rhs_half_pre - rhs_lambda_sq); }
};

VarianceIdentity neuron_variance_identity(int n, const InitScheme& scheme, int batch_size, std::int64_t trials,
                                          const SeedSpec& seed, const RunOptions& options = {});

enum class InitWrapper { Iid, SignFlip, BatchCenter };

std::string to_string(InitWrapper wrapper);

struct LivingFractionStats {
  std::vector<double> fractions;
  MeanSummary summary;
  /// Trials in which at least one point survived.
  Estimate network_alive;
  /// Sign-flip trials that hit the all-zero pre-activation case.
  std::int64_t zero_preactivation_trials = 0;
};

/// Fraction of the batch alive at the output, per trial. Trials with the
/// same index use the same base network and data for every wrapper.
LivingFractionStats living_fraction_stats(const NetworkSetup& setup, InitWrapper wrapper, int batch_size,
                                          std::int64_t trials, const SeedSpec& seed, const RunOptions& options = {});

struct EventTally {
  std::int64_t all_survive = 0;
  std::int64_t partial_death = 0;
  std::int64_t total_death = 0;

  std::int64_t conditioned() const { return all_survive + partial_death + total_death; }
};

/// Per-layer counts of E1/E2/E3 transitions over trials still alive on entry.
std::vector<EventTally> event_frequencies(const NetworkSetup& setup, int batch_size, std::int64_t trials,
                                          const SeedSpec& seed, const RunOptions& options = {});

std::vector<std::uint8_t> conv_alive_outcomes(const ConvSetup& setup, int batch_size, std::int64_t trials,
                                              const SeedSpec& seed, const RunOptions& options = {});

Estimate estimate_conv_alive_prob(const ConvSetup& setup, int batch_size, std::int64_t trials, const SeedSpec& seed,
                                  const RunOptions& options = {});

}  // namespace deadrelu
