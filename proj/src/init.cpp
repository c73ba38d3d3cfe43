#include "deadrelu/init.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <boost/random/normal_distribution.hpp>

namespace deadrelu {

double ParamDistribution::variance() const {
  return shape == Shape::Normal ? scale * scale : scale * scale / 3.0;
}

double ParamDistribution::sample(Engine& engine) const {
  if (shape == Shape::Normal) {
    boost::random::normal_distribution<double> dist(0.0, scale);
    return dist(engine);
  }
  std::uniform_real_distribution<double> dist(-scale, scale);
  return dist(engine);
}

InitScheme InitScheme::normal(double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw InvalidInput("normal variance must be positive");
  return InitScheme(Kind::Normal, variance);
}

InitScheme InitScheme::uniform_sym(double halfwidth) {
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) throw InvalidInput("uniform half-width must be positive");
  return InitScheme(Kind::UniformSym, halfwidth);
}

InitScheme InitScheme::parse(const std::string& text) {
  if (text == "he") return he();
  if (text == "xavier") return xavier();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string head = text.substr(0, colon);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw InvalidInput("trailing characters");
    } catch (const std::logic_error&) {
      throw InvalidInput("bad numeric value in init scheme '" + text + "'");
    }
    if (head == "normal") return normal(value);
    if (head == "uniform") return uniform_sym(value);
  }
  throw InvalidInput("unknown init scheme '" + text + "' (expected he, xavier, normal:<var>, uniform:<halfwidth>)");
}

std::string InitScheme::name() const {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  switch (kind_) {
    case Kind::He: return "he";
    case Kind::Xavier: return "xavier";
    case Kind::Normal: return "normal:" + num(parameter_);
    case Kind::UniformSym: return "uniform:" + num(parameter_);
  }
  return "?";
}

ParamDistribution InitScheme::resolve(int fan_in) const {
  if (fan_in < 1) throw InvalidInput("fan-in must be positive");
  switch (kind_) {
    case Kind::He: return {ParamDistribution::Shape::Normal, std::sqrt(2.0 / fan_in)};
    case Kind::Xavier: return {ParamDistribution::Shape::Normal, std::sqrt(1.0 / fan_in)};
    case Kind::Normal: return {ParamDistribution::Shape::Normal, std::sqrt(parameter_)};
    case Kind::UniformSym: return {ParamDistribution::Shape::Uniform, parameter_};
  }
  return {};
}

ReluNetwork sample_network(int n, int k, const InitScheme& scheme, BiasMode mode, Engine& engine) {
  if (n < 1 || k < 1) throw InvalidInput("network width and depth must be positive");
  const ParamDistribution dist = scheme.resolve(n);
  std::vector<LayerParams> layers;
  layers.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    LayerParams layer{Matrix(n, n), Vector::Zero(n)};
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) layer.weights(r, c) = dist.sample(engine);
    }
    if (mode == BiasMode::FreeBias) {
      for (int r = 0; r < n; ++r) layer.bias[r] = dist.sample(engine);
    }
    layers.push_back(std::move(layer));
  }
  return ReluNetwork(std::move(layers), mode);
}

ReluNetwork sample_network(int n, int k, const InitScheme& scheme, BiasMode mode, const SeedSpec& seed,
                           std::uint64_t trial_index) {
  Engine engine = make_engine(seed.seed_for(trial_index));
  return sample_network(n, k, scheme, mode, engine);
}

Matrix sample_standard_normal(int m_points, int n, Engine& engine) {
  if (m_points < 1 || n < 1) throw InvalidInput("batch dimensions must be positive");
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  Matrix points(m_points, n);
  for (int m = 0; m < m_points; ++m) {
    for (int i = 0; i < n; ++i) points(m, i) = dist(engine);
  }
  return points;
}

DataBatch sample_batch(int m_points, int n, const SeedSpec& seed, std::uint64_t trial_index) {
  const std::uint64_t s = seed.seed_for(trial_index);
  Engine engine = make_engine(s);
  return DataBatch(sample_standard_normal(m_points, n, engine), GeneratorSpec{"standard_normal", s});
}

std::vector<ConvLayerParams> sample_conv_network(int channels, int kernel_side, int spatial_side, int k,
                                                 const InitScheme& scheme, BiasMode mode, Engine& engine) {
  if (k < 1) throw InvalidInput("depth must be positive");
  const ParamDistribution dist = scheme.resolve(channels * kernel_side * kernel_side);
  std::vector<ConvLayerParams> layers;
  layers.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    ConvLayerParams layer;
    layer.channels = channels;
    layer.kernel_side = kernel_side;
    layer.spatial_side = spatial_side;
    layer.kernels.reserve(static_cast<std::size_t>(channels * channels));
    for (int c = 0; c < channels * channels; ++c) {
      Matrix kernel(kernel_side, kernel_side);
      for (int u = 0; u < kernel_side; ++u) {
        for (int v = 0; v < kernel_side; ++v) kernel(u, v) = dist.sample(engine);
      }
      layer.kernels.push_back(std::move(kernel));
    }
    layer.bias = Vector::Zero(channels);
    if (mode == BiasMode::FreeBias) {
      for (int c = 0; c < channels; ++c) layer.bias[c] = dist.sample(engine);
    }
    validate(layer);
    layers.push_back(std::move(layer));
  }
  return layers;
}

SignFlipResult sign_flip_init(const ReluNetwork& net, const DataBatch& batch) {
  if (batch.width() != net.width()) throw InvalidInput("batch width does not match network width");
  std::vector<LayerParams> layers = net.layers();
  const auto m_points = static_cast<std::size_t>(batch.size());
  std::vector<std::uint8_t> alive(m_points, 1);
  int alive_prev = batch.size();

  std::vector<bool> flips;
  std::vector<int> counts;
  bool zero_case = false;
  Matrix input = batch.points();

  for (auto& layer : layers) {
    Matrix pre = affine(layer, input);
    int killed_count = 0;
    for (std::size_t m = 0; m < m_points; ++m) {
      if (alive[m] && killed(pre.row(static_cast<Eigen::Index>(m)))) ++killed_count;
    }
    const bool flip = 2 * killed_count > alive_prev;
    if (flip) {
      layer.weights = -layer.weights;
      layer.bias = -layer.bias;
      pre = -pre;
    }
    int survivors = 0;
    for (std::size_t m = 0; m < m_points; ++m) {
      if (!alive[m]) continue;
      const auto row = pre.row(static_cast<Eigen::Index>(m));
      if (killed(row)) {
        alive[m] = 0;
        if (row.isZero(0.0)) zero_case = true;
      } else {
        ++survivors;
      }
    }
    flips.push_back(flip);
    counts.push_back(survivors);
    alive_prev = survivors;
    input = pre.cwiseMax(0.0);
  }

  SignFlipResult result{ReluNetwork(std::move(layers), net.bias_mode()), std::move(flips), std::move(counts), 0,
                        zero_case};
  result.final_alive = result.alive_counts.back();
  return result;
}

ReluNetwork batch_center_init(const ReluNetwork& net, const DataBatch& batch) {
  if (batch.width() != net.width()) throw InvalidInput("batch width does not match network width");
  std::vector<LayerParams> layers = net.layers();
  const auto m_points = static_cast<std::size_t>(batch.size());
  std::vector<std::uint8_t> alive(m_points, 1);
  Matrix input = batch.points();
  for (auto& layer : layers) {
    Matrix linear = input * layer.weights.transpose();
    // Center over the points alive on entry; once none are left, over all.
    const bool any_alive = std::find(alive.begin(), alive.end(), std::uint8_t{1}) != alive.end();
    std::vector<Eigen::Index> rows;
    for (std::size_t m = 0; m < m_points; ++m) {
      if (alive[m] || !any_alive) rows.push_back(static_cast<Eigen::Index>(m));
    }
    // Offsets from the first row, so identical rows center to exactly zero.
    const Eigen::RowVectorXd anchor = linear.row(rows.front());
    Eigen::RowVectorXd offset = Eigen::RowVectorXd::Zero(linear.cols());
    for (Eigen::Index r : rows) offset += linear.row(r) - anchor;
    const Eigen::RowVectorXd mean = anchor + offset / static_cast<double>(rows.size());

    layer.bias = -mean.transpose();
    linear.rowwise() += layer.bias.transpose();
    for (std::size_t m = 0; m < m_points; ++m) {
      if (alive[m] && killed(linear.row(static_cast<Eigen::Index>(m)))) alive[m] = 0;
    }
    input = linear.cwiseMax(0.0);
  }
  return ReluNetwork(std::move(layers), BiasMode::FreeBias);
}

}  // namespace deadrelu
