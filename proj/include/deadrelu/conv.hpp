#pragma once

#include <vector>

#include "deadrelu/network.hpp"

namespace deadrelu {

/// A square convolutional layer: `channels` inputs to `channels` outputs on a
/// d x d grid, stride 1, "same" zero padding.
///
/// Images are flattened channel-major: index (c * d + y) * d + x. A batch of
/// images is therefore an M x (channels * d * d) matrix, the same shape
/// forward_trace() consumes for the induced dense map.
struct ConvLayerParams {
  int channels = 1;
  int kernel_side = 1;
  int spatial_side = 1;
  /// kernels[out * channels + in] is a kernel_side x kernel_side matrix.
  std::vector<Matrix> kernels;
  /// One bias per output channel.
  Vector bias;

  int flat_width() const { return channels * spatial_side * spatial_side; }
};

/// Throws InvalidInput if shapes are inconsistent or the kernel exceeds the image.
void validate(const ConvLayerParams& layer);

/// Cross-correlation of each row of `images` with the layer kernels, plus bias.
/// Kernel tap (u, v) reads input pixel (y + u - (K-1)/2, x + v - (K-1)/2).
Matrix conv_affine(const ConvLayerParams& layer, const Matrix& images);

/// The (channels d^2) x (channels d^2) matrix and bias vector that realize
/// the same affine map as conv_affine().
LayerParams induced_dense(const ConvLayerParams& layer);

ForwardTrace conv_forward_trace(const std::vector<ConvLayerParams>& layers, const Matrix& images);

/// Streaming counterpart of conv_forward_trace(), see alive_profile().
std::vector<int> conv_alive_profile(const std::vector<ConvLayerParams>& layers, const Matrix& images);

}  // namespace deadrelu
