#pragma once

#include <cstdint>
#include <random>

namespace heatvar {

/// Stream families keep replication noise, Rademacher signs, and synthetic
/// test draws on disjoint substreams of one master seed.
enum class StreamKind : std::uint64_t {
  Path = 1,
  Xi = 2,
  Synthetic = 3,
};

/// Deterministic derivation of per-replication RNG streams from a master seed.
/// stream(kind, r) and stream(kind', r') are independent unless both match;
/// the same master seed reproduces the same draws bit-for-bit on one build.
struct SeedSpec {
  std::uint64_t master_seed = 0;

  std::mt19937_64 stream(StreamKind kind, std::uint64_t replication) const;
};

namespace detail {
std::uint64_t splitmix64(std::uint64_t& state);
}

}  // namespace heatvar
