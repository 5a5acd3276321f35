#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
// pure function of (key, counter), so any element of a stream can be produced
// independently of evaluation order or thread count.

#include <array>
#include <cstdint>

namespace spectsim {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  constexpr std::uint32_t kMulA = 0xD2511F53U;
  constexpr std::uint32_t kMulB = 0xCD9E8D57U;
  constexpr std::uint32_t kWeylA = 0x9E3779B9U;
  constexpr std::uint32_t kWeylB = 0xBB67AE85U;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

constexpr PhiloxKey philox_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Sequential uniform draws from the stream identified by (seed, stream_id).
/// Two streams with different ids never share a counter block.
class PhiloxStream {
public:
  constexpr PhiloxStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(philox_key(seed)), stream_(stream_id) {}

  constexpr std::uint32_t next_u32() {
    if (pos_ == 4) {
      refill();
    }
    return buffer_[pos_++];
  }

  constexpr std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in the open interval (0, 1) with 53 bits of resolution.
  constexpr double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

private:
  constexpr void refill() {
    buffer_ = philox4x32_10({static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
                             static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32)},
                            key_);
    ++block_;
    pos_ = 0;
  }

  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int pos_ = 4;
};

/// Mixes a base seed with up to three tags into a new 64-bit seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t a, std::uint32_t b = 0,
                                    std::uint32_t c = 0) {
  const auto out = philox4x32_10({a, b, c, 0x5EEDU}, philox_key(seed));
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace spectsim
