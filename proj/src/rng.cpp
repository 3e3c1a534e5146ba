#include "condlaw/rng.hpp"

#include <cmath>

#include "condlaw/errors.hpp"

namespace condlaw {

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t worker_index,
                          std::uint64_t grid_point_index) {
  if (worker_index > 0xFFFFFFFFULL || grid_point_index > 0xFFFFFFFFULL) {
    throw DomainError("derive_seed: worker and grid indices must fit in 32 bits");
  }
  const std::uint64_t key = (worker_index << 32) | grid_point_index;
  return splitmix64(splitmix64(master_seed) ^ key);
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw DomainError("poisson: mean must be finite and nonnegative");
  }
  if (mean == 0.0) return 0;
  // exp(-mean) stays well above the denormal range for mean <= 500.
  if (mean > 500.0) {
    return poisson(mean / 2) + poisson(mean / 2);
  }
  double u = uniform();
  double term = std::exp(-mean);
  double cdf = term;
  std::int64_t n = 0;
  while (u > cdf) {
    ++n;
    term *= mean / static_cast<double>(n);
    const double next_cdf = cdf + term;
    if (next_cdf == cdf) break;  // rounding floor of the cdf
    cdf = next_cdf;
  }
  return n;
}

}  // namespace condlaw
