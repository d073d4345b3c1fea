#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace drabi {

/// 64-bit Mersenne Twister (19937-bit state) with explicit, serializable state.
/// Distributions are derived by hand so that a restored state reproduces the
/// same stream regardless of standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  /// Independent stream for one chain, derived from (master seed, chain index).
  static Rng for_stream(std::uint64_t master_seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Exponential with unit rate.
  double exponential() { return -std::log1p(-uniform()); }
  /// Standard normal (Box-Muller, no cached spare).
  double normal();
  std::uint64_t below(std::uint64_t n);

  std::string serialize() const;
  static Rng deserialize(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace drabi
