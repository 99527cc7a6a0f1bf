#pragma once

#include <cstdint>
#include <random>

#include "ipd/action.hpp"

namespace ipd {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Per-game seed: three chained SplitMix64 steps over (master, cell, iteration).
///
///   h0 = mix64(master + G)
///   h1 = mix64(h0 + cell + G)
///   seed = mix64(h1 + iteration + G)
///
/// with G = 0x9E3779B97F4A7C15. Depends only on its arguments, never on the
/// order in which games are scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t cell_index,
                                    std::uint64_t iteration_index) noexcept {
  const std::uint64_t h0 = mix64(master_seed + kGoldenGamma);
  const std::uint64_t h1 = mix64(h0 + cell_index + kGoldenGamma);
  return mix64(h1 + iteration_index + kGoldenGamma);
}

/// Sub-stream seed inside one game (opponent rule stream, per-round decode seeds).
constexpr std::uint64_t derive_stream_seed(std::uint64_t game_seed, std::uint64_t tag,
                                           std::uint64_t index = 0) noexcept {
  return derive_seed(game_seed, tag, index);
}

namespace stream_tag {
inline constexpr std::uint64_t kOpponentRule = 0x42;       // 'B'
inline constexpr std::uint64_t kDecodeA = 0x41;            // 'A'
inline constexpr std::uint64_t kDecodeB = 0x4242;
}  // namespace stream_tag

/// Seeded stream. The engine (mt19937_64) is fully specified by the standard;
/// the conversions below are ours so draws are identical on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// True with probability p. p <= 0 never fires, p >= 1 always fires.
  bool bernoulli(double p) { return uniform01() < p; }

  /// Fair coin over the two actions.
  Action coin() { return (engine_() >> 63) != 0 ? Action::Defect : Action::Cooperate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ipd
