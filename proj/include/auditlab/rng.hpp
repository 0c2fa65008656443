#pragma once

#include <cstdint>
#include <random>

namespace auditlab {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent, reproducible stream seeds
// from a master seed so that parallel work is schedule-invariant.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

// Named stream ids so each stage draws from its own sequence.
namespace streams {
inline constexpr std::uint64_t profiles = 1;
inline constexpr std::uint64_t campaign = 2;
inline constexpr std::uint64_t evaluations = 3;
inline constexpr std::uint64_t callbacks = 4;
inline constexpr std::uint64_t events = 5;
inline constexpr std::uint64_t donations = 6;
inline constexpr std::uint64_t investors = 7;
inline constexpr std::uint64_t bootstrap = 8;
inline constexpr std::uint64_t montecarlo = 9;
}  // namespace streams

}  // namespace auditlab
