#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "padist/pa.h"
#include "padist/random.h"

namespace padist::stat {

// F(x) = exp(-(1 + xi (x - mu) / sigma)^(-1/xi)); the Gumbel form is used
// when |xi| < kGumbelThreshold.
struct GEVParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;

  void validate() const;
};

inline constexpr double kGumbelThreshold = 1e-6;

double gev_cdf(double x, const GEVParams& p);
double gev_logpdf(double x, const GEVParams& p);
double gev_quantile(double prob, const GEVParams& p);
double gev_sample(const GEVParams& p, Engine& eng);
// Redraws until the value is non-negative.
double gev_sample_truncated(const GEVParams& p, Engine& eng);
double gev_loglik(std::span<const double> samples, const GEVParams& p);

struct GevFit {
  GEVParams params;
  double loglik = 0.0;
  std::array<double, 3> std_error{0.0, 0.0, 0.0};  // mu, sigma, xi; NaN if singular
  std::size_t n = 0;
  int evaluations = 0;
};

// Maximum likelihood with a Nelder-Mead search from Gumbel moment estimates.
GevFit gev_fit_mle(std::span<const double> samples);

// SDR_victim(gamma) times a non-negative GEV draw (linear scale).
double victim_sdr_sample(double gamma, const GEVParams& params, tx::PaKind kind,
                         double smoothness, Engine& eng);
double victim_sdr_sample(double gamma, const GEVParams& params, tx::PaKind kind,
                         double smoothness, uint64_t seed);

}  // namespace padist::stat
