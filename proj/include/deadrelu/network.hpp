#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace deadrelu {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Thrown when an operation receives arguments outside its domain.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class BiasMode { ZeroBias, FreeBias };

std::string to_string(BiasMode mode);
BiasMode parse_bias_mode(const std::string& text);

/// One square affine map x -> A x + b.
struct LayerParams {
  Matrix weights;
  Vector bias;

  int width() const { return static_cast<int>(bias.size()); }
};

/// A fully connected ReLU network in which every layer has the same width.
///
/// Construction validates the shape invariants; the object is immutable
/// afterwards, so it can be shared freely between threads.
class ReluNetwork {
 public:
  ReluNetwork(std::vector<LayerParams> layers, BiasMode bias_mode);

  int width() const { return width_; }
  int depth() const { return static_cast<int>(layers_.size()); }
  BiasMode bias_mode() const { return bias_mode_; }
  const std::vector<LayerParams>& layers() const { return layers_; }
  const LayerParams& layer(int j) const { return layers_.at(static_cast<std::size_t>(j)); }

  /// Number of scalar parameters, k(n^2 + n).
  std::int64_t parameter_count() const;

 private:
  std::vector<LayerParams> layers_;
  BiasMode bias_mode_;
  int width_;
};

struct GeneratorSpec {
  std::string distribution = "explicit";
  std::uint64_t seed = 0;
};

/// M data points stored as the rows of an M x n matrix.
class DataBatch {
 public:
  explicit DataBatch(Matrix points, GeneratorSpec generator = {});

  int size() const { return static_cast<int>(points_.rows()); }
  int width() const { return static_cast<int>(points_.cols()); }
  const Matrix& points() const { return points_; }
  const GeneratorSpec& generator() const { return generator_; }

 private:
  Matrix points_;
  GeneratorSpec generator_;
};

/// Per-layer record of a forward pass over a batch.
///
/// alive_mask[j][m] is 1 while point m has had at least one strictly
/// positive pre-activation at every layer up to and including j.
struct ForwardTrace {
  std::vector<Matrix> pre_activations;
  std::vector<Matrix> post_activations;
  std::vector<std::vector<std::uint8_t>> alive_mask;

  int depth() const { return static_cast<int>(alive_mask.size()); }
  int batch_size() const { return alive_mask.empty() ? 0 : static_cast<int>(alive_mask.front().size()); }
};

/// Pre-activations A x + b for every row of `input`.
Matrix affine(const LayerParams& layer, const Matrix& input);

/// A point is killed by a layer when none of its pre-activations is positive.
/// Exact comparison on purpose: no epsilon.
template <typename Derived>
bool killed(const Eigen::DenseBase<Derived>& pre_activation) {
  return (pre_activation.derived().array() <= 0.0).all();
}

ForwardTrace forward_trace(const ReluNetwork& net, const DataBatch& batch);

std::vector<int> alive_counts(const ForwardTrace& trace);

bool network_alive(const ForwardTrace& trace);

/// Living-point count after each layer, without keeping intermediate
/// tensors. Dead rows are dropped as soon as they die, and the pass stops
/// once nothing is alive (remaining entries are zero).
std::vector<int> alive_profile(const ReluNetwork& net, const Matrix& points);

/// Layer-transition events conditioned on at least one living point
/// entering the layer.
enum class LayerEvent {
  AllSurvive,    ///< E1: every remaining point lives.
  PartialDeath,  ///< E2: some, but not all, remaining points die.
  TotalDeath,    ///< E3: every remaining point dies.
};

LayerEvent classify_event(int prev_alive, int cur_alive);

std::string to_string(LayerEvent event);

}  // namespace deadrelu
