#include "padist/ks.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "padist/error.h"

namespace padist::stat {

double kolmogorov_sf(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                 std::size_t stride) {
  if (stride < 1) throw InvalidParameter("ks_test: stride must be >= 1");
  std::vector<double> x;
  x.reserve(samples.size() / stride + 1);
  for (std::size_t i = 0; i < samples.size(); i += stride) x.push_back(samples[i]);
  if (x.size() < 30) {
    throw InsufficientData("ks_test: " + std::to_string(x.size()) +
                           " samples after decimation, need >= 30");
  }
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  KsResult r;
  r.statistic = d;
  r.n = x.size();
  const double sn = std::sqrt(n);
  r.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

}  // namespace padist::stat
