#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace padist::stat {

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
  std::size_t n = 0;
};

// Survival function of the Kolmogorov distribution,
// 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2).
double kolmogorov_sf(double x);

// One-sample KS test of every stride-th sample (starting at index 0)
// against cdf. Throws InsufficientData below 30 retained samples.
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                 std::size_t stride = 1);

}  // namespace padist::stat
