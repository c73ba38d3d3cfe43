#pragma once

#include <cstdint>

#include "deadrelu/network.hpp"

namespace deadrelu {

/// Lower and upper bounds on the probability that a random network is alive.
struct BoundPair {
  double lower = 0.0;
  double upper = 1.0;
};

/// (1 - 2^-n)^k: the probability that one fixed nonzero point survives k
/// random layers of width n.
double lower_bound(int n, std::int64_t k);

/// (1 - 2^-(n^2+n))^(k-1) with free biases, (1 - 2^-(n^2))^(k-1) with zero
/// biases. Equal to 1 for a single layer.
double upper_bound(int n, std::int64_t k, BiasMode mode);

BoundPair bounds(int n, std::int64_t k, BiasMode mode);

/// Least width n >= 1 with lower_bound(n, k) >= p.
int min_width(double p, std::int64_t k);

/// Bounds for a depth-k stack of convolutional layers with `channels`
/// channels and kernel_side x kernel_side kernels.
BoundPair conv_bounds(int channels, int kernel_side, std::int64_t k);

}  // namespace deadrelu
