#include "deadrelu/network.hpp"

#include <algorithm>
#include <cmath>

namespace deadrelu {

std::string to_string(BiasMode mode) {
  return mode == BiasMode::ZeroBias ? "zero" : "free";
}

BiasMode parse_bias_mode(const std::string& text) {
  if (text == "zero" || text == "zero-bias" || text == "ZeroBias") return BiasMode::ZeroBias;
  if (text == "free" || text == "free-bias" || text == "FreeBias") return BiasMode::FreeBias;
  throw InvalidInput("unknown bias mode '" + text + "'");
}

ReluNetwork::ReluNetwork(std::vector<LayerParams> layers, BiasMode bias_mode)
    : layers_(std::move(layers)), bias_mode_(bias_mode), width_(0) {
  if (layers_.empty()) throw InvalidInput("network needs at least one layer");
  width_ = layers_.front().width();
  if (width_ < 1) throw InvalidInput("network width must be positive");
  for (const auto& layer : layers_) {
    if (layer.weights.rows() != width_ || layer.weights.cols() != width_ || layer.bias.size() != width_) {
      throw InvalidInput("every layer must be " + std::to_string(width_) + "x" + std::to_string(width_));
    }
    if (bias_mode_ == BiasMode::ZeroBias && !layer.bias.isZero(0.0)) {
      throw InvalidInput("zero-bias network has a nonzero bias entry");
    }
  }
}

std::int64_t ReluNetwork::parameter_count() const {
  const std::int64_t n = width_;
  return depth() * (n * n + n);
}

DataBatch::DataBatch(Matrix points, GeneratorSpec generator)
    : points_(std::move(points)), generator_(std::move(generator)) {
  if (points_.rows() < 1) throw InvalidInput("data batch needs at least one point");
  if (points_.cols() < 1) throw InvalidInput("data points need at least one coordinate");
  if (!points_.allFinite()) throw InvalidInput("data batch contains non-finite values");
}

Matrix affine(const LayerParams& layer, const Matrix& input) {
  Matrix out = input * layer.weights.transpose();
  out.rowwise() += layer.bias.transpose();
  return out;
}

ForwardTrace forward_trace(const ReluNetwork& net, const DataBatch& batch) {
  if (batch.width() != net.width()) {
    throw InvalidInput("batch has " + std::to_string(batch.width()) + " columns but network width is " +
                       std::to_string(net.width()));
  }
  const auto m_points = static_cast<std::size_t>(batch.size());
  ForwardTrace trace;
  trace.pre_activations.reserve(static_cast<std::size_t>(net.depth()));
  trace.post_activations.reserve(static_cast<std::size_t>(net.depth()));

  std::vector<std::uint8_t> alive(m_points, 1);
  const Matrix* input = &batch.points();
  for (const auto& layer : net.layers()) {
    Matrix pre = affine(layer, *input);
    for (std::size_t m = 0; m < m_points; ++m) {
      if (alive[m] && killed(pre.row(static_cast<Eigen::Index>(m)))) alive[m] = 0;
    }
    trace.post_activations.push_back(pre.cwiseMax(0.0));
    trace.pre_activations.push_back(std::move(pre));
    trace.alive_mask.push_back(alive);
    input = &trace.post_activations.back();
  }
  return trace;
}

std::vector<int> alive_counts(const ForwardTrace& trace) {
  std::vector<int> counts;
  counts.reserve(trace.alive_mask.size());
  for (const auto& mask : trace.alive_mask) {
    counts.push_back(static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1})));
  }
  return counts;
}

bool network_alive(const ForwardTrace& trace) {
  if (trace.alive_mask.empty()) return false;
  const auto& last = trace.alive_mask.back();
  return std::find(last.begin(), last.end(), std::uint8_t{1}) != last.end();
}

std::vector<int> alive_profile(const ReluNetwork& net, const Matrix& points) {
  if (points.cols() != net.width()) throw InvalidInput("batch width does not match network width");
  std::vector<int> counts(static_cast<std::size_t>(net.depth()), 0);
  Matrix current = points;
  for (int j = 0; j < net.depth(); ++j) {
    Matrix pre = affine(net.layer(j), current);
    Eigen::Index living = 0;
    for (Eigen::Index m = 0; m < pre.rows(); ++m) {
      if (!killed(pre.row(m))) {
        if (living != m) pre.row(living) = pre.row(m);
        ++living;
      }
    }
    counts[static_cast<std::size_t>(j)] = static_cast<int>(living);
    if (living == 0) break;
    current = pre.topRows(living).cwiseMax(0.0);
  }
  return counts;
}

LayerEvent classify_event(int prev_alive, int cur_alive) {
  if (prev_alive < 1) throw InvalidInput("event classification needs at least one living point entering the layer");
  if (cur_alive < 0 || cur_alive > prev_alive) throw InvalidInput("living count cannot grow across a layer");
  if (cur_alive == prev_alive) return LayerEvent::AllSurvive;
  if (cur_alive == 0) return LayerEvent::TotalDeath;
  return LayerEvent::PartialDeath;
}

std::string to_string(LayerEvent event) {
  switch (event) {
    case LayerEvent::AllSurvive: return "E1";
    case LayerEvent::PartialDeath: return "E2";
    case LayerEvent::TotalDeath: return "E3";
  }
  return "?";
}

}  // namespace deadrelu
