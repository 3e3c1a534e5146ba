#pragma once

#include <cstdint>
#include <random>

namespace condlaw {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of the rng stream owned by (worker_index, grid_point_index) in a run.
///
///   seed = splitmix64(splitmix64(master_seed) ^ (worker_index << 32 | grid_point_index))
///
/// Both indices must fit in 32 bits; within one master seed the map is
/// injective because the packed key is injective and every other step is a
/// bijection.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t worker_index,
                          std::uint64_t grid_point_index);

/// Random stream: mt19937_64 plus portable conversions, so that the stream of
/// values depends only on the seed and not on the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next();
      if (x >= threshold) return x % n;
    }
  }

  /// Poisson(mean) by sequential inversion; large means are split in halves.
  std::int64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

}  // namespace condlaw
