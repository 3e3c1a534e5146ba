#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace condlaw::stats {

double normal_cdf(double x);

/// Wilson score interval for a binomial proportion at the given two-sided
/// level (z = 1.96 for 95%).
std::pair<double, double> wilson_interval(std::uint64_t hits, std::uint64_t trials, double z = 1.959963984540054);

/// sup_x |F_n(x) - Phi(x)| for the empirical CDF of `sorted` (ascending).
/// Exact for samples with ties.
double kolmogorov_distance_normal(const std::vector<double>& sorted);

/// Dvoretzky-Kiefer-Wolfowitz half-width sqrt(log(2 / alpha) / (2 n)).
double dkw_halfwidth(std::uint64_t n, double alpha);

}  // namespace condlaw::stats
