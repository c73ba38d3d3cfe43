#include "deadrelu/bounds.hpp"

#include <cmath>
#include <string>

namespace deadrelu {

namespace {

// (1 - 2^-e)^power for e >= 1, power >= 0.
//
// While 1 - 2^-e is exactly representable (e <= 53) std::pow evaluates the
// power directly, which keeps small closed forms exact. Beyond that the base
// rounds to 1, so the logarithm is taken with log1p instead.
double survive_power(std::int64_t exponent_bits, std::int64_t power) {
  if (power == 0) return 1.0;
  if (exponent_bits <= 53) {
    const double base = 1.0 - std::ldexp(1.0, -static_cast<int>(exponent_bits));
    return std::pow(base, static_cast<double>(power));
  }
  if (exponent_bits > 1100) return 1.0;
  const double tail = std::ldexp(1.0, -static_cast<int>(exponent_bits));
  return std::exp(static_cast<double>(power) * std::log1p(-tail));
}

void require_positive(std::int64_t value, const char* name) {
  if (value < 1) throw InvalidInput(std::string(name) + " must be at least 1");
}

}  // namespace

double lower_bound(int n, std::int64_t k) {
  require_positive(n, "width");
  require_positive(k, "depth");
  return survive_power(n, k);
}

double upper_bound(int n, std::int64_t k, BiasMode mode) {
  require_positive(n, "width");
  require_positive(k, "depth");
  const std::int64_t wide = n;
  const std::int64_t bits = mode == BiasMode::FreeBias ? wide * wide + wide : wide * wide;
  return survive_power(bits, k - 1);
}

BoundPair bounds(int n, std::int64_t k, BiasMode mode) {
  return {lower_bound(n, k), upper_bound(n, k, mode)};
}

int min_width(double p, std::int64_t k) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("target probability must lie strictly between 0 and 1");
  require_positive(k, "depth");
  // 1 - p^(1/k), computed without cancellation.
  const double miss = -std::expm1(std::log(p) / static_cast<double>(k));
  double guess = std::ceil(-std::log2(miss));
  if (!(guess >= 1.0)) guess = 1.0;
  if (guess > 4096.0) guess = 4096.0;
  int n = static_cast<int>(guess);
  // The closed form can be off by one near integer boundaries; settle it on
  // the bound itself.
  while (n > 1 && lower_bound(n - 1, k) >= p) --n;
  while (lower_bound(n, k) < p) ++n;
  return n;
}

BoundPair conv_bounds(int channels, int kernel_side, std::int64_t k) {
  require_positive(channels, "channel count");
  require_positive(kernel_side, "kernel side");
  require_positive(k, "depth");
  const std::int64_t c = channels;
  const std::int64_t side = kernel_side;
  return {survive_power(c, k), survive_power(c * (side * side + 1), k - 1)};
}

}  // namespace deadrelu
