#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace deadrelu {

/// 64-bit finalizer from SplitMix64.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Root of a family of independent random streams.
///
/// Trial t of a stream draws from seed_for(t), a fixed hash of
/// (base_seed, stream_label, t). Results therefore never depend on which
/// thread runs which trial.
struct SeedSpec {
  std::uint64_t base_seed = 0;
  std::string stream_label;

  /// Seed identifying the (base_seed, stream_label) stream itself.
  std::uint64_t stream_seed() const;
  std::uint64_t seed_for(std::uint64_t trial_index) const;
  /// A sub-stream, e.g. child("grid/n=3/k=8").
  SeedSpec child(const std::string& label) const;
};

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

}  // namespace deadrelu
