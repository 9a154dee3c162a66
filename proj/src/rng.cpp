#include "heatvar/rng.hpp"

namespace heatvar {

namespace detail {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

std::mt19937_64 SeedSpec::stream(StreamKind kind, std::uint64_t replication) const {
  std::uint64_t state = master_seed;
  detail::splitmix64(state);
  state ^= static_cast<std::uint64_t>(kind) * 0xD6E8FEB86659FD93ULL;
  detail::splitmix64(state);
  state ^= replication;
  std::uint32_t words[8];
  for (int i = 0; i < 4; ++i) {
    const std::uint64_t w = detail::splitmix64(state);
    words[2 * i] = static_cast<std::uint32_t>(w);
    words[2 * i + 1] = static_cast<std::uint32_t>(w >> 32);
  }
  std::seed_seq seq(words, words + 8);
  return std::mt19937_64(seq);
}

}  // namespace heatvar
