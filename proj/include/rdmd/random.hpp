#pragma once

#include <array>
#include <cstdint>

namespace rdmd {

/// xoshiro256** seeded through SplitMix64. The algorithm is fixed, so a seed
/// yields the same stream on every platform.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double next_unit();

 private:
  std::array<std::uint64_t, 4> s_;
};

/// Standard normal variates by the Box-Muller transform; both outputs of each
/// transform are used, in order (cos branch first).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next();

 private:
  Xoshiro256 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for sub-stream `index` of `master`. Index 0 returns `master` itself.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace rdmd
