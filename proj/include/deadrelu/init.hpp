#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deadrelu/conv.hpp"
#include "deadrelu/network.hpp"
#include "deadrelu/random.hpp"

namespace deadrelu {

/// A zero-mean distribution symmetric under sign flips, fully resolved.
struct ParamDistribution {
  enum class Shape { Normal, Uniform };
  Shape shape = Shape::Normal;
  /// Standard deviation for Normal, half-width for Uniform.
  double scale = 1.0;

  double variance() const;
  double sample(Engine& engine) const;
};

/// Parameter initialization family. He and Xavier depend on the fan-in.
class InitScheme {
 public:
  enum class Kind { He, Xavier, Normal, UniformSym };

  static InitScheme he() { return InitScheme(Kind::He, 0.0); }
  static InitScheme xavier() { return InitScheme(Kind::Xavier, 0.0); }
  static InitScheme normal(double variance);
  static InitScheme uniform_sym(double halfwidth);

  /// Accepts "he", "xavier", "normal:<variance>", "uniform:<halfwidth>".
  static InitScheme parse(const std::string& text);

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  std::string name() const;

  ParamDistribution resolve(int fan_in) const;

  friend bool operator==(const InitScheme&, const InitScheme&) = default;

 private:
  InitScheme(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}
  Kind kind_;
  double parameter_;
};

/// Draws every weight (and, with free biases, every bias) IID from
/// scheme.resolve(n), layer by layer, row-major.
ReluNetwork sample_network(int n, int k, const InitScheme& scheme, BiasMode mode, Engine& engine);

ReluNetwork sample_network(int n, int k, const InitScheme& scheme, BiasMode mode, const SeedSpec& seed,
                           std::uint64_t trial_index);

/// M points with IID standard normal coordinates.
Matrix sample_standard_normal(int m_points, int n, Engine& engine);

DataBatch sample_batch(int m_points, int n, const SeedSpec& seed, std::uint64_t trial_index);

/// Convolutional stack with fan-in channels * kernel_side^2.
std::vector<ConvLayerParams> sample_conv_network(int channels, int kernel_side, int spatial_side, int k,
                                                 const InitScheme& scheme, BiasMode mode, Engine& engine);

struct SignFlipResult {
  ReluNetwork network;
  std::vector<bool> flips;
  /// Living points after each layer of the returned network.
  std::vector<int> alive_counts;
  int final_alive = 0;
  /// A point entering some layer alive had an all-zero pre-activation, so
  /// negation could not revive it.
  bool zero_preactivation = false;
};

/// Negates any layer that kills more than half of the points alive on entry.
SignFlipResult sign_flip_init(const ReluNetwork& net, const DataBatch& batch);

/// Shifts each bias so that, layer by layer, every neuron's mean
/// pre-activation over the points still alive entering that layer is zero
/// (over the whole batch once no point is alive). Weights are unchanged and
/// the result always has free biases.
ReluNetwork batch_center_init(const ReluNetwork& net, const DataBatch& batch);

}  // namespace deadrelu
