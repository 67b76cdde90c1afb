#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace farboot {

/// SplitMix64 finalizer. Used for seeding and stream derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Order-sensitive, platform-independent mix of a master seed and a stream
/// index. Every derived random stream in the library goes through here.
std::uint64_t stable_hash(std::uint64_t master_seed, std::uint64_t stream_index);

/// xoshiro256** generator seeded through SplitMix64.
///
/// Normal variates use the Marsaglia polar method and uniform integers use
/// Lemire's multiply-shift rejection, so a given seed yields the same stream on
/// every platform (the standard library distributions are not portable).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, bound).
  std::size_t below(std::size_t bound);
  /// Standard normal.
  double normal();

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace farboot
