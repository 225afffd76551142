#include "padist/optimize.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "padist/error.h"

namespace padist::opt {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0, const std::vector<double>& step,
                             const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  if (n == 0 || step.size() != n) throw InvalidParameter("nelder_mead: bad dimensions");
  constexpr double kAlpha = 1.0, kGamma = 2.0, kRho = 0.5, kSigma = 0.5;

  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  while (res.evaluations < opts.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

    double diam = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        diam = std::max(diam, std::abs(pts[i][j] - pts[best][j]));
      }
    }
    const double spread = std::abs(fv[worst] - fv[best]);
    if (diam <= opts.x_tol ||
        (std::isfinite(fv[worst]) && spread <= opts.f_tol * (std::abs(fv[best]) + 1e-300))) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / n;
    }
    for (std::size_t j = 0; j < n; ++j) {
      xr[j] = centroid[j] + kAlpha * (centroid[j] - pts[worst][j]);
    }
    const double fr = eval(xr);
    if (fr < fv[best]) {
      for (std::size_t j = 0; j < n; ++j) {
        xe[j] = centroid[j] + kGamma * (xr[j] - centroid[j]);
      }
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    for (std::size_t j = 0; j < n; ++j) {
      xc[j] = outside ? centroid[j] + kRho * (xr[j] - centroid[j])
                      : centroid[j] + kRho * (pts[worst][j] - centroid[j]);
    }
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      pts[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) {
        pts[i][j] = pts[best][j] + kSigma * (pts[i][j] - pts[best][j]);
      }
      fv[i] = eval(pts[i]);
    }
  }

  const auto it = std::min_element(fv.begin(), fv.end());
  res.x = pts[static_cast<std::size_t>(it - fv.begin())];
  res.f = *it;
  return res;
}

}  // namespace padist::opt
