#pragma once

// Philox4x32-10 counter-based generator. Each path owns the stream
// counter = (draw lo, draw hi, path lo, path hi) under key = seed, so paths
// can be simulated in any order or on any thread with identical output.

#include <array>
#include <cmath>
#include <cstdint>

namespace shls::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Block philox4x32_10(Block ctr, Key key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

inline Key seed_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Block number `draw` of stream `path`.
inline Block draw_block(Key key, std::uint64_t path, std::uint64_t draw) {
  return philox4x32_10({static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32),
                        static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)},
                       key);
}

/// Uniform on [0, 1) from two words (53 bits).
inline double to_uniform(std::uint32_t hi, std::uint32_t lo) {
  return static_cast<double>((static_cast<std::uint64_t>(hi >> 5) << 26) | (lo >> 6)) * 0x1.0p-53;
}

class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path, std::uint64_t first_draw = 0)
      : key_(seed_key(seed)), path_(path), draw_(first_draw) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    if (used_ >= 4) refill();
    const double u = to_uniform(block_[used_], block_[used_ + 1]);
    used_ += 2;
    return u;
  }

  /// Uniform on (0, 1].
  double uniform_open_zero() { return 1.0 - uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open_zero()));
    const double theta = 6.283185307179586 * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double exponential(double rate) { return -std::log(uniform_open_zero()) / rate; }

  std::uint64_t draws() const { return draw_; }

 private:
  void refill() {
    block_ = draw_block(key_, path_, draw_);
    ++draw_;
    used_ = 0;
  }

  Key key_;
  std::uint64_t path_;
  std::uint64_t draw_ = 0;
  Block block_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shls::rng
