#pragma once

#include <cstdint>

namespace dvar {

/// SplitMix64 finalizer. Bijective on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent sub-seed from (seed, index).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Counter-based uniform source.
///
/// A draw is a pure function of (seed, draw index, stream), so parallel
/// generation gives the same numbers regardless of scheduling, and two
/// samplers built from the same seed see identical uniforms on every
/// (draw, stream) pair. That second property is what common-random-number
/// comparisons rely on.
class KeyedUniform {
 public:
  explicit KeyedUniform(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform in the open interval (0, 1).
  double operator()(std::uint64_t draw, std::uint64_t stream) const noexcept {
    const std::uint64_t key = mix64(seed_ ^ mix64(draw * 0xd1b54a32d192ed03ULL + stream));
    const std::uint64_t bits = mix64(key ^ 0xa0761d6478bd642fULL) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
};

/// Stream ids used by the samplers. Coordinates are keyed by their natural
/// variable index, offset by the sampling stage.
namespace stream {
inline constexpr std::uint64_t contemporaneous = 0;
inline constexpr std::uint64_t horizon = 1 << 16;
inline constexpr std::uint64_t marginal_draw = 2 << 16;
inline constexpr std::uint64_t auxiliary = 3 << 16;
}  // namespace stream

}  // namespace dvar
