#pragma once

#include <array>
#include <cstdint>

namespace lipreg {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// A stream is fully determined by (key, counter). Experiments key on the
/// user's seed and put the trial index in the upper counter words, so any
/// trial can be replayed on its own and sharding never changes results.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block encrypt(Block counter, Key key) noexcept;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform integer in [0, bound) without modulo bias.
  std::uint32_t below(std::uint32_t bound) noexcept;

 private:
  void refill() noexcept;

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  unsigned used_ = 4;
};

}  // namespace lipreg
