#include "deadrelu/random.hpp"

namespace deadrelu {

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t SeedSpec::stream_seed() const { return mix64(mix64(base_seed) ^ fnv1a(stream_label)); }

std::uint64_t SeedSpec::seed_for(std::uint64_t trial_index) const {
  return mix64(stream_seed() + mix64(trial_index));
}

SeedSpec SeedSpec::child(const std::string& label) const {
  return {base_seed, stream_label.empty() ? label : stream_label + "/" + label};
}

}  // namespace deadrelu
