#include "deadrelu/conv.hpp"

#include <algorithm>
#include <string>

namespace deadrelu {

void validate(const ConvLayerParams& layer) {
  if (layer.channels < 1 || layer.kernel_side < 1 || layer.spatial_side < 1) {
    throw InvalidInput("convolution sizes must be positive");
  }
  if (layer.kernel_side > layer.spatial_side) {
    throw InvalidInput("kernel side " + std::to_string(layer.kernel_side) + " exceeds image side " +
                       std::to_string(layer.spatial_side));
  }
  const auto expected = static_cast<std::size_t>(layer.channels) * static_cast<std::size_t>(layer.channels);
  if (layer.kernels.size() != expected) throw InvalidInput("need one kernel per (output, input) channel pair");
  for (const auto& kernel : layer.kernels) {
    if (kernel.rows() != layer.kernel_side || kernel.cols() != layer.kernel_side) {
      throw InvalidInput("kernel has wrong shape");
    }
  }
  if (layer.bias.size() != layer.channels) throw InvalidInput("need one bias per output channel");
}

Matrix conv_affine(const ConvLayerParams& layer, const Matrix& images) {
  validate(layer);
  const int d = layer.spatial_side;
  const int c_count = layer.channels;
  const int side = layer.kernel_side;
  const int offset = (side - 1) / 2;
  const int plane = d * d;
  if (images.cols() != layer.flat_width()) throw InvalidInput("image batch does not match layer shape");

  Matrix out(images.rows(), images.cols());
  for (Eigen::Index m = 0; m < images.rows(); ++m) {
    const double* in = images.row(m).data();
    double* dst = out.row(m).data();
    for (int o = 0; o < c_count; ++o) {
      double* out_plane = dst + o * plane;
      for (int p = 0; p < plane; ++p) out_plane[p] = layer.bias[o];
      for (int i = 0; i < c_count; ++i) {
        const Matrix& kernel = layer.kernels[static_cast<std::size_t>(o * c_count + i)];
        const double* in_plane = in + i * plane;
        for (int u = 0; u < side; ++u) {
          for (int v = 0; v < side; ++v) {
            const double w = kernel(u, v);
            const int dy = u - offset;
            const int dx = v - offset;
            const int y_lo = std::max(0, -dy);
            const int y_hi = std::min(d, d - dy);
            const int x_lo = std::max(0, -dx);
            const int x_hi = std::min(d, d - dx);
            for (int y = y_lo; y < y_hi; ++y) {
              const double* src_row = in_plane + (y + dy) * d + dx;
              double* dst_row = out_plane + y * d;
              for (int x = x_lo; x < x_hi; ++x) dst_row[x] += w * src_row[x];
            }
          }
        }
      }
    }
  }
  return out;
}

LayerParams induced_dense(const ConvLayerParams& layer) {
  validate(layer);
  const int d = layer.spatial_side;
  const int c_count = layer.channels;
  const int side = layer.kernel_side;
  const int offset = (side - 1) / 2;
  const int width = layer.flat_width();

  LayerParams dense{Matrix::Zero(width, width), Vector::Zero(width)};
  for (int o = 0; o < c_count; ++o) {
    for (int y = 0; y < d; ++y) {
      for (int x = 0; x < d; ++x) {
        const int row = (o * d + y) * d + x;
        dense.bias[row] = layer.bias[o];
        for (int i = 0; i < c_count; ++i) {
          const Matrix& kernel = layer.kernels[static_cast<std::size_t>(o * c_count + i)];
          for (int u = 0; u < side; ++u) {
            for (int v = 0; v < side; ++v) {
              const int sy = y + u - offset;
              const int sx = x + v - offset;
              if (sy < 0 || sy >= d || sx < 0 || sx >= d) continue;
              dense.weights(row, (i * d + sy) * d + sx) += kernel(u, v);
            }
          }
        }
      }
    }
  }
  return dense;
}

namespace {

void check_chain(const std::vector<ConvLayerParams>& layers, const Matrix& images) {
  if (layers.empty()) throw InvalidInput("convolutional network needs at least one layer");
  for (const auto& layer : layers) {
    validate(layer);
    if (layer.flat_width() != layers.front().flat_width() || layer.channels != layers.front().channels) {
      throw InvalidInput("convolutional layers must share channel count and image side");
    }
  }
  if (images.rows() < 1) throw InvalidInput("image batch is empty");
  if (images.cols() != layers.front().flat_width()) throw InvalidInput("image batch does not match layer shape");
}

}  // namespace

ForwardTrace conv_forward_trace(const std::vector<ConvLayerParams>& layers, const Matrix& images) {
  check_chain(layers, images);
  ForwardTrace trace;
  std::vector<std::uint8_t> alive(static_cast<std::size_t>(images.rows()), 1);
  const Matrix* input = &images;
  for (const auto& layer : layers) {
    Matrix pre = conv_affine(layer, *input);
    for (Eigen::Index m = 0; m < pre.rows(); ++m) {
      if (alive[static_cast<std::size_t>(m)] && killed(pre.row(m))) alive[static_cast<std::size_t>(m)] = 0;
    }
    trace.post_activations.push_back(pre.cwiseMax(0.0));
    trace.pre_activations.push_back(std::move(pre));
    trace.alive_mask.push_back(alive);
    input = &trace.post_activations.back();
  }
  return trace;
}

std::vector<int> conv_alive_profile(const std::vector<ConvLayerParams>& layers, const Matrix& images) {
  check_chain(layers, images);
  std::vector<int> counts(layers.size(), 0);
  Matrix current = images;
  for (std::size_t j = 0; j < layers.size(); ++j) {
    Matrix pre = conv_affine(layers[j], current);
    Eigen::Index living = 0;
    for (Eigen::Index m = 0; m < pre.rows(); ++m) {
      if (!killed(pre.row(m))) {
        if (living != m) pre.row(living) = pre.row(m);
        ++living;
      }
    }
    counts[j] = static_cast<int>(living);
    if (living == 0) break;
    current = pre.topRows(living).cwiseMax(0.0);
  }
  return counts;
}

}  // namespace deadrelu
