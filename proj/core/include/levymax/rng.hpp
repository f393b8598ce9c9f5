#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace levymax {

/// Identifies one independent random stream: a user seed, a stream id
/// (layer index, Wiener factor, bridge, ...) and a replicate index.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t stream = 0;
  std::uint32_t replicate = 0;
};

/// Reserved stream ids. Layer streams use the layer index directly.
namespace streams {
inline constexpr std::uint32_t kWiener = 0x80000000u;
inline constexpr std::uint32_t kBridge = 0x80000001u;
inline constexpr std::uint32_t kProbe = 0x80000002u;
inline constexpr std::uint32_t kInitialField = 0x80000003u;
inline constexpr std::uint32_t kFamily = 0x80000004u;
}  // namespace streams

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The key is the 64-bit seed; the counter is (block, stream, replicate), so
/// every StreamKey addresses a disjoint sequence of 2^34 32-bit outputs.
/// Satisfies UniformRandomBitGenerator and can drive <random> distributions.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;

  explicit Philox4x32(StreamKey key = {});

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  void discard(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> buffer_{};
  unsigned position_ = 4;
};

}  // namespace levymax
