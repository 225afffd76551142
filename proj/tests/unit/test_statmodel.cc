#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "padist/error.h"
#include "padist/gev.h"
#include "padist/ks.h"
#include "padist/optimize.h"
#include "padist/random.h"
#include "padist/rxmetrics.h"
#include "padist/spatial.h"

using namespace padist;
using namespace padist::stat;

TEST(Gev, CdfLogpdfQuantileOracle) {
  struct Row {
    double xi, cdf, logpdf, q90;
  };
  const Row rows[] = {{-0.2, 0.6944679747716133, -0.3921756021706396, 1.7120260568685137},
                      {0.0, 0.6696114953452681, -0.5351309237753571, 1.9130184563054875},
                      {0.3, 0.6401887982210662, -0.7161053499446736, 2.3550159479019728}};
  for (const auto& r : rows) {
    const GEVParams p{0.881, 0.4586, r.xi};
    EXPECT_NEAR(gev_cdf(1.3, p), r.cdf, 1e-12) << r.xi;
    EXPECT_NEAR(gev_logpdf(1.3, p), r.logpdf, 1e-12) << r.xi;
    EXPECT_NEAR(gev_quantile(0.9, p), r.q90, 1e-12) << r.xi;
  }
}

TEST(Gev, GumbelBranchIsContinuous) {
  const GEVParams g{0.0, 1.0, 0.0}, near{0.0, 1.0, 1e-7};
  for (double x : {-1.0, 0.0, 2.0}) {
    EXPECT_NEAR(gev_cdf(x, g), gev_cdf(x, near), 1e-6);
    EXPECT_NEAR(gev_logpdf(x, g), gev_logpdf(x, near), 1e-6);
  }
}

TEST(Gev, SupportBoundaries) {
  const GEVParams p{0.0, 1.0, -0.5};
  EXPECT_DOUBLE_EQ(gev_cdf(2.5, p), 1.0);
  EXPECT_TRUE(std::isinf(gev_logpdf(2.5, p)));
  EXPECT_THROW(gev_quantile(1.0, p), InvalidParameter);
  EXPECT_THROW(gev_quantile(0.0, p), InvalidParameter);
  EXPECT_THROW((GEVParams{0.0, -1.0, 0.0}.validate()), InvalidParameter);
}

TEST(Gev, SampleMeanMatchesTheory) {
  const GEVParams p{0.881, 0.4586, -0.0438};
  Engine eng(1);
  double mean = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) mean += gev_sample(p, eng) / n;
  const double expected = p.mu + p.sigma * (std::tgamma(1.0 - p.xi) - 1.0) / p.xi;
  EXPECT_NEAR(mean, expected, 0.005);
}

TEST(Gev, TruncatedSamplesAreNonNegative) {
  const GEVParams p{0.1, 0.5, 0.0};
  Engine eng(2);
  for (int i = 0; i < 10000; ++i) ASSERT_GE(gev_sample_truncated(p, eng), 0.0);
}

TEST(Gev, FitRecoversParameters) {
  const GEVParams p{0.881, 0.4586, -0.0438};
  Engine eng(derive_seed(3, "gev"));
  std::vector<double> x(20000);
  for (auto& v : x) v = gev_sample(p, eng);
  const auto fit = gev_fit_mle(x);
  EXPECT_LT(std::abs(fit.params.mu - p.mu), 4 * fit.std_error[0]);
  EXPECT_LT(std::abs(fit.params.sigma - p.sigma), 4 * fit.std_error[1]);
  EXPECT_LT(std::abs(fit.params.xi - p.xi), 4 * fit.std_error[2]);
  EXPECT_GE(fit.loglik, gev_loglik(x, p));
}

TEST(Gev, FitRejectsDegenerateData) {
  std::vector<double> few(50, 1.0);
  EXPECT_THROW(gev_fit_mle(few), InsufficientData);
  std::vector<double> constant(500, 2.0);
  EXPECT_THROW(gev_fit_mle(constant), FitFailure);
}

TEST(Gev, VictimSampleScalesTheory) {
  const GEVParams p{1.0, 1e-9, 0.0};
  const double v = victim_sdr_sample(2.0, p, tx::PaKind::kSoftLimiter, 2.0, uint64_t{5});
  EXPECT_NEAR(v, rx::sdr_theory_victim(2.0), 1e-6);
}

TEST(Ks, KolmogorovSurvivalOracle) {
  const double x[] = {0.5, 0.8, 1.0, 1.2224, 1.6276, 2.0};
  const double sf[] = {0.9639452436648751,  0.5441424115741981,   0.26999967167735456,
                       0.1007106142361416,  0.010001537333060776, 0.0006709252557796953};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(kolmogorov_sf(x[i]), sf[i], 1e-12) << x[i];
  EXPECT_DOUBLE_EQ(kolmogorov_sf(0.0), 1.0);
}

TEST(Ks, UniformSamplesPassAndShiftedFail) {
  Engine eng(4);
  std::vector<double> u(2000);
  for (auto& v : u) v = uniform01(eng);
  const auto cdf = [](double v) { return std::clamp(v, 0.0, 1.0); };
  EXPECT_GT(ks_test(u, cdf).p_value, 0.01);
  for (auto& v : u) v = v * 0.8;
  EXPECT_LT(ks_test(u, cdf).p_value, 1e-6);
}

TEST(Ks, StatisticOfKnownSample) {
  const std::vector<double> s{0.1, 0.4, 0.7};
  std::vector<double> big;
  for (int i = 0; i < 10; ++i) big.insert(big.end(), s.begin(), s.end());
  const auto r = ks_test(big, [](double v) { return v; });
  EXPECT_NEAR(r.statistic, 0.3, 1e-12);
  EXPECT_EQ(r.n, 30u);
}

TEST(Ks, StrideAndMinimumSize) {
  std::vector<double> x(100);
  for (int i = 0; i < 100; ++i) x[i] = (i + 0.5) / 100;
  const auto r = ks_test(x, [](double v) { return v; }, 2);
  EXPECT_EQ(r.n, 50u);
  EXPECT_THROW(ks_test(x, [](double v) { return v; }, 4), InsufficientData);
}

TEST(NelderMead, MinimizesRosenbrock) {
  const auto f = [](const std::vector<double>& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  const auto r = opt::nelder_mead(f, {-1.2, 1.0}, {0.5, 0.5});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(NelderMead, NonFiniteTreatedAsInfinity) {
  const auto f = [](const std::vector<double>& x) {
    return x[0] < 0 ? NAN : (x[0] - 2) * (x[0] - 2);
  };
  const auto r = opt::nelder_mead(f, {0.5}, {1.0});
  EXPECT_NEAR(r.x[0], 2.0, 1e-4);
}

TEST(Spatial, CheckerboardAutocorrelation) {
  SDRMap m(16, 16, 4.0);
  for (int iy = 0; iy < 16; ++iy)
    for (int ix = 0; ix < 16; ++ix) m.at(ix, iy) = ((ix + iy) % 2) ? 1.0 : -1.0;
  const auto a = spatial_autocorrelation(m);
  ASSERT_EQ(a.acf.size(), 9u);
  EXPECT_NEAR(a.acf[0], 1.0, 1e-12);
  EXPECT_NEAR(a.acf[1], -1.0, 1e-12);
  EXPECT_NEAR(a.acf[2], 1.0, 1e-12);
}

TEST(Spatial, DecorrelationInterpolates) {
  const auto d = decorrelation_distance({1.0, 0.5, 0.2}, 4.0);
  ASSERT_TRUE(d.crossed);
  const double t = (0.5 - std::exp(-1.0)) / (0.5 - 0.2);
  EXPECT_NEAR(d.distance, 4.0 * (1 + t), 1e-12);
  const auto never = decorrelation_distance({1.0, 0.9, 0.8}, 4.0);
  EXPECT_FALSE(never.crossed);
  EXPECT_TRUE(std::isinf(never.distance));
  EXPECT_TRUE(decorrelation_distance({1.0, 0.1}, 4.0).below_resolution);
}

TEST(Spatial, DegenerateMapsRejected) {
  SDRMap flat(10, 10, 4.0);
  std::fill(flat.values.begin(), flat.values.end(), 3.0);
  EXPECT_THROW(spatial_autocorrelation(flat), DegenerateInput);
  SDRMap small(4, 4, 4.0);
  EXPECT_THROW(spatial_autocorrelation(small), InvalidParameter);
}

TEST(Spatial, MaskedCellsIgnored) {
  auto m = synthesize_exponential_map(20, 20, 4.0, 12.0, 20.0, 3.0, 7);
  const auto full = spatial_autocorrelation(m);
  m.valid.assign(m.values.size(), 1);
  m.valid[0] = 0;
  m.values[0] = 1e9;
  const auto masked = spatial_autocorrelation(m);
  EXPECT_NEAR(masked.acf[1], full.acf[1], 0.05);
}

TEST(Spatial, SynthesizedMapsRecoverLengthOnAverage) {
  const auto maps = synthesize_exponential_maps(20, 64, 64, 4.0, 20.0, 20.0, 3.0, 3);
  std::vector<Autocorrelation> parts;
  for (const auto& m : maps) parts.push_back(spatial_autocorrelation(m));
  const auto d = decorrelation_distance(average_autocorrelation(parts).acf, 4.0);
  EXPECT_NEAR(d.distance, 20.0, 4.0);
}
