#include "padist/gev.h"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "padist/error.h"
#include "padist/optimize.h"
#include "padist/rxmetrics.h"

namespace padist::stat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEulerGamma = 0.57721566490153286061;

bool gumbel(double xi) { return std::abs(xi) < kGumbelThreshold; }

// log t with t = 1 + xi z; NaN outside the support.
double log_t(double z, double xi) {
  const double a = xi * z;
  if (a <= -1.0) return std::numeric_limits<double>::quiet_NaN();
  return std::log1p(a);
}

}  // namespace

void GEVParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameter("GEV scale must be positive, got " + std::to_string(sigma));
  }
  if (!std::isfinite(mu) || !std::isfinite(xi)) {
    throw InvalidParameter("GEV location and shape must be finite");
  }
}

double gev_cdf(double x, const GEVParams& p) {
  const double z = (x - p.mu) / p.sigma;
  if (gumbel(p.xi)) return std::exp(-std::exp(-z));
  const double lt = log_t(z, p.xi);
  if (std::isnan(lt)) return p.xi > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::exp(-lt / p.xi));
}

double gev_logpdf(double x, const GEVParams& p) {
  const double z = (x - p.mu) / p.sigma;
  const double ls = std::log(p.sigma);
  if (gumbel(p.xi)) return -ls - z - std::exp(-z);
  const double lt = log_t(z, p.xi);
  if (std::isnan(lt)) return -kInf;
  return -ls - (1.0 + 1.0 / p.xi) * lt - std::exp(-lt / p.xi);
}

double gev_quantile(double prob, const GEVParams& p) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw InvalidParameter("GEV quantile probability must lie in (0, 1)");
  }
  const double y = -std::log(prob);
  if (gumbel(p.xi)) return p.mu - p.sigma * std::log(y);
  return p.mu + p.sigma * std::expm1(-p.xi * std::log(y)) / p.xi;
}

double gev_sample(const GEVParams& p, Engine& eng) {
  double u = 0.0;
  while (u == 0.0) u = uniform01(eng);
  return gev_quantile(u, p);
}

double gev_sample_truncated(const GEVParams& p, Engine& eng) {
  for (int i = 0; i < 1000000; ++i) {
    const double v = gev_sample(p, eng);
    if (v >= 0.0) return v;
  }
  throw NumericError("truncated GEV: no non-negative draw in 1e6 attempts");
}

double gev_loglik(std::span<const double> samples, const GEVParams& p) {
  double s = 0.0;
  for (double x : samples) {
    const double l = gev_logpdf(x, p);
    if (!std::isfinite(l)) return -kInf;
    s += l;
  }
  return s;
}

GevFit gev_fit_mle(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 100) {
    throw InsufficientData("GEV fit needs >= 100 samples, got " + std::to_string(n));
  }
  double mean = 0.0;
  for (double x : samples) {
    if (!std::isfinite(x)) throw InvalidParameter("GEV fit: non-finite sample");
    mean += x;
  }
  mean /= n;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= (n - 1);
  if (!(var > 1e-300) || std::sqrt(var) <= 1e-12 * std::max(1.0, std::abs(mean))) {
    throw FitFailure("GEV fit: samples have zero variance");
  }

  const double s0 = std::sqrt(6.0 * var) / M_PI;
  const double m0 = mean - kEulerGamma * s0;
  auto nll = [&](const std::vector<double>& th) {
    const GEVParams p{th[0], std::exp(th[1]), th[2]};
    return -gev_loglik(samples, p);
  };
  opt::NelderMeadOptions o;
  o.f_tol = 1e-14;
  o.x_tol = 1e-10;
  auto r = opt::nelder_mead(nll, {m0, std::log(s0), 0.0}, {0.1 * s0, 0.1, 0.1}, o);
  int evals = r.evaluations;
  // Restart once from the optimum with a smaller simplex.
  r = opt::nelder_mead(nll, r.x, {0.01 * s0, 0.01, 0.01}, o);
  evals += r.evaluations;
  if (!std::isfinite(r.f)) throw FitFailure("GEV fit: likelihood is not finite anywhere");

  GevFit fit;
  fit.params = {r.x[0], std::exp(r.x[1]), r.x[2]};
  fit.loglik = -r.f;
  fit.n = n;
  fit.evaluations = evals;

  // Observed information in (mu, sigma, xi) from central differences.
  const std::array<double, 3> th{fit.params.mu, fit.params.sigma, fit.params.xi};
  const std::array<double, 3> h{1e-4 * fit.params.sigma, 1e-4 * fit.params.sigma, 1e-4};
  auto f = [&](std::array<double, 3> t) {
    return -gev_loglik(samples, GEVParams{t[0], t[1], t[2]});
  };
  Eigen::Matrix3d H;
  const double f0 = f(th);
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      double v;
      if (i == j) {
        auto tp = th, tm = th;
        tp[i] += h[i];
        tm[i] -= h[i];
        v = (f(tp) - 2.0 * f0 + f(tm)) / (h[i] * h[i]);
      } else {
        auto pp = th, pm = th, mp = th, mm = th;
        pp[i] += h[i]; pp[j] += h[j];
        pm[i] += h[i]; pm[j] -= h[j];
        mp[i] -= h[i]; mp[j] += h[j];
        mm[i] -= h[i]; mm[j] -= h[j];
        v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
      }
      H(i, j) = H(j, i) = v;
    }
  }
  const Eigen::LLT<Eigen::Matrix3d> llt(H);
  if (llt.info() == Eigen::Success && H.allFinite()) {
    const Eigen::Matrix3d cov = llt.solve(Eigen::Matrix3d::Identity());
    for (int i = 0; i < 3; ++i) fit.std_error[i] = std::sqrt(cov(i, i));
  } else {
    fit.std_error.fill(std::numeric_limits<double>::quiet_NaN());
  }
  return fit;
}

double victim_sdr_sample(double gamma, const GEVParams& params, tx::PaKind kind,
                         double smoothness, Engine& eng) {
  params.validate();
  return rx::sdr_theory_victim(gamma, kind, smoothness) * gev_sample_truncated(params, eng);
}

double victim_sdr_sample(double gamma, const GEVParams& params, tx::PaKind kind,
                         double smoothness, uint64_t seed) {
  Engine eng(seed);
  return victim_sdr_sample(gamma, params, kind, smoothness, eng);
}

}  // namespace padist::stat
