#pragma once

#include <cstdint>
#include <random>

namespace mldfm {

using Rng = std::mt19937_64;

/* splitmix64 finalizer; good avalanche, cheap, and stable across platforms. */
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/* Derives a decorrelated stream seed from a master seed and a stream tag.
   Every consumer of randomness owns a tag so that streams never overlap and
   per-replication seeds do not depend on execution order. */
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t tag) { return Rng(mix_seed(seed, tag)); }

namespace stream {
constexpr std::uint64_t factors = 0x66616374;      // AR(1) factor paths
constexpr std::uint64_t loadings = 0x6c6f6164;     // U(0.5,1) loading draws
constexpr std::uint64_t idio_u = 0x69646975;       // heteroscedastic variance multipliers
constexpr std::uint64_t permutation = 0x7065726d;  // idiosyncratic covariance permutation
constexpr std::uint64_t panel_noise = 0x6e6f6973;  // Gaussian panel noise
constexpr std::uint64_t replication = 0x7265706c;  // per-replication noise seeds
constexpr std::uint64_t subsample = 0x73756273;    // subsample block starts
}  // namespace stream

/* Seed for Monte Carlo replication m: failures in one replication never shift
   the stream of any other. */
inline std::uint64_t replication_seed(std::uint64_t experiment_seed, int m) {
  return mix_seed(mix_seed(experiment_seed, stream::replication), static_cast<std::uint64_t>(m));
}

}  // namespace mldfm
