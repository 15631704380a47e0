#pragma once

#include <cstdint>
#include <random>

namespace discforge {

// Independent random streams derived from one user seed. Instance generation
// and algorithm randomness never share a stream.
enum class Stream : std::uint64_t {
  kInstance = 0x1,
  kAlgorithm = 0x2,
  kMonteCarlo = 0x3,
};

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t counter = 0) {
  const std::uint64_t key =
      splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(stream) << 32 | counter));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace discforge
