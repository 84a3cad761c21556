#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al., SC'11).
//
// Every random quantity in the library is addressed by (seed, stream, index):
// the seed is the Philox key, the stream id and a 64-bit index select the
// counter. Draw t of a bootstrap, observation i of a synthetic sample, or
// replication k of a simulation therefore get the same numbers no matter which
// thread produces them or in what order.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ujack {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

inline Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

// Named stream ids. Distinct consumers of one seed never share counters.
enum class Stream : std::uint32_t {
  kSynthesis = 1,
  kMultiplier = 2,
  kIncomplete = 3,
  kReplication = 4,
  kOracle = 5,
};

// Sequential generator over the counter space of one (seed, stream, index).
// Word 2 of the counter is the position within the substream.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, Stream stream, std::uint64_t index)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        index_(index),
        stream_(static_cast<std::uint32_t>(stream)) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return block_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  // Standard normal by Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, bound), bound >= 1, unbiased by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
    std::uint64_t x = next_u64();
    while (x > limit) x = next_u64();
    return x % bound;
  }

 private:
  void refill() {
    const Philox4x32Counter ctr{static_cast<std::uint32_t>(index_),
                                static_cast<std::uint32_t>(index_ >> 32), block_no_++, stream_};
    block_ = philox4x32(ctr, key_);
    pos_ = 0;
  }

  Philox4x32Key key_;
  std::uint64_t index_;
  std::uint32_t stream_;
  std::uint32_t block_no_ = 0;
  Philox4x32Counter block_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Child seed for substream `index` of `seed`, e.g. one per MC replication.
inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) {
  PhiloxStream s(seed, stream, index);
  return s.next_u64();
}

}  // namespace ujack
