#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "padist/channel.h"
#include "padist/error.h"
#include "padist/pa.h"
#include "padist/random.h"
#include "padist/txchain.h"

using namespace padist;
using namespace padist::tx;

namespace {

CMatrix naive_modulate(const CMatrix& x, const OFDMConfig& cfg) {
  const int N = cfg.fft_size;
  CMatrix y = CMatrix::Zero(x.cols(), N);
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    for (int t = 0; t < N; ++t) {
      for (int n = 0; n < cfg.num_used(); ++n) {
        const double ph = 2.0 * M_PI * cfg.subcarrier_map[n] * t / N;
        y(k, t) += x(n, k) * std::complex<double>(std::cos(ph), std::sin(ph));
      }
    }
  }
  return y;
}

}  // namespace

TEST(Ofdm, CenteredMapSkipsDc) {
  const auto cfg = OFDMConfig::centered(64, 12);
  ASSERT_EQ(cfg.num_used(), 12);
  EXPECT_EQ(cfg.subcarrier_map.front(), -6);
  EXPECT_EQ(cfg.subcarrier_map[5], -1);
  EXPECT_EQ(cfg.subcarrier_map[6], 1);
  EXPECT_EQ(cfg.subcarrier_map.back(), 6);
  EXPECT_THROW(OFDMConfig::centered(8, 12), InvalidParameter);
}

TEST(Ofdm, DuplicateOrOutOfRangeSubcarriersRejected) {
  OFDMConfig cfg;
  cfg.fft_size = 8;
  cfg.subcarrier_map = {1, 1};
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  cfg.subcarrier_map = {4};
  EXPECT_THROW(cfg.validate(), InvalidParameter);
}

TEST(Ofdm, ModulateMatchesNaiveSum) {
  const auto cfg = OFDMConfig::centered(32, 10);
  Engine eng(3);
  CMatrix x(10, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = complex_normal(eng, 1.0);
  const CMatrix y = ofdm_modulate(x, cfg);
  EXPECT_TRUE(y.isApprox(naive_modulate(x, cfg), 1e-12));
}

TEST(Ofdm, DemodulateInvertsModulate) {
  const auto cfg = OFDMConfig::centered(64, 12);
  OfdmModulator mod(cfg);
  Engine eng(4);
  CMatrix x(12, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = complex_normal(eng, 1.0);
  const CMatrix back = mod.demodulate(mod.modulate(x));
  EXPECT_TRUE(back.transpose().isApprox(x, 1e-12));
}

TEST(Ofdm, CyclicPrefixCopiesTail) {
  const auto cfg = OFDMConfig::centered(16, 4, 4);
  OfdmModulator mod(cfg);
  CMatrix y(1, 16);
  for (int t = 0; t < 16; ++t) y(0, t) = t;
  const CMatrix c = mod.with_cyclic_prefix(y);
  ASSERT_EQ(c.cols(), 20);
  EXPECT_EQ(c(0, 0), std::complex<double>(12.0));
  EXPECT_EQ(c(0, 4), std::complex<double>(0.0));
}

TEST(Precoder, MrtRowsAreUnitNormAndCoPhased) {
  const auto H = channel::gen_rayleigh(1.0, 12, 8, 5);
  const auto W = mrt_precoder(H);
  for (int n = 0; n < 12; ++n) {
    EXPECT_NEAR(W.W.row(n).norm(), 1.0, 1e-12);
    const std::complex<double> g = (H.H.row(n).transpose().array() * W.W.row(n).transpose().array()).sum();
    EXPECT_NEAR(g.imag(), 0.0, 1e-12);
    EXPECT_NEAR(g.real(), H.H.row(n).norm(), 1e-12);
  }
}

TEST(Precoder, ZeroChannelRowIsDegenerate) {
  auto H = channel::gen_rayleigh(1.0, 4, 4, 1);
  H.H.row(2).setZero();
  EXPECT_THROW(mrt_precoder(H), DegenerateInput);
}

TEST(Ibo, ScaleToIboHitsTarget) {
  const auto H = channel::gen_rayleigh(1.0, 12, 16, 2);
  const auto W = mrt_precoder(H);
  const auto pa = PAConfig::soft_limiter(16, 0.5);
  const auto cfg = OFDMConfig::centered(64, 12);
  const double sp = scale_to_ibo(W, pa, cfg, 2.0);
  const auto p = per_antenna_power(W, sp);
  EXPECT_NEAR(ibo_average(p, pa), 2.0, 1e-12);
  const auto g = ibo_per_antenna(p, pa);
  for (int k = 0; k < 16; ++k) EXPECT_NEAR(g[k], 0.5 / p[k], 1e-12);
}

TEST(Pa, SoftLimiterClipsAmplitudeKeepsPhase) {
  const auto pa = PAConfig::soft_limiter(1, 4.0);
  CMatrix y(1, 3);
  y << std::complex<double>(1.0, 1.0), std::complex<double>(3.0, 4.0), 0.0;
  const CMatrix o = pa_apply(y, pa);
  EXPECT_EQ(o(0, 0), y(0, 0));
  EXPECT_NEAR(std::abs(o(0, 1)), 2.0, 1e-12);
  EXPECT_NEAR(std::arg(o(0, 1)), std::arg(y(0, 1)), 1e-12);
  EXPECT_EQ(o(0, 2), std::complex<double>(0.0));
}

TEST(Pa, RappCurveProperties) {
  EXPECT_NEAR(am_am(PaKind::kRapp, 1.0, 1.0, 2.0), std::pow(2.0, -0.25), 1e-14);
  EXPECT_NEAR(am_am(PaKind::kRapp, 1e3, 1.0, 2.0), 1.0, 1e-6);
  EXPECT_NEAR(am_am(PaKind::kRapp, 1e-4, 1.0, 2.0), 1e-4, 1e-16);
  EXPECT_NEAR(am_am(PaKind::kRapp, 2.0, 1.0, 200.0), 1.0, 1e-3);
  EXPECT_TRUE(std::isfinite(am_am(PaKind::kRapp, 1e10, 1.0, 500.0)));
}

TEST(Pa, SoftLimiterBussgangOracle) {
  EXPECT_NEAR(bussgang_lambda(1.0, PaKind::kSoftLimiter), 0.7715233514688887, 1e-13);
  EXPECT_NEAR(normalized_distortion_power(1.0, PaKind::kSoftLimiter), 0.0368722769667714, 1e-13);
  EXPECT_NEAR(bussgang_lambda(0.5, PaKind::kSoftLimiter), 0.5923142129990423, 1e-13);
  EXPECT_NEAR(bussgang_lambda(4.0, PaKind::kSoftLimiter), 0.9899754304919385, 1e-13);
  EXPECT_DOUBLE_EQ(bussgang_lambda(INFINITY, PaKind::kSoftLimiter), 1.0);
}

TEST(Pa, RappBussgangOracle) {
  const double lam[] = {0.5636709957752151, 0.7161801024778347, 0.8499209142456632,
                        0.9381130713961833};
  const double dist[] = {0.03060944732115778, 0.02594834568992388, 0.013875395545507652,
                         0.0041433177280527644};
  const double gammas[] = {0.5, 1.0, 2.0, 4.0};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(bussgang_lambda(gammas[i], PaKind::kRapp, 2.0), lam[i], 1e-9);
    EXPECT_NEAR(normalized_distortion_power(gammas[i], PaKind::kRapp, 2.0), dist[i], 1e-9);
  }
}

TEST(Pa, QuadratureAgreesWithClosedForm) {
  for (double g : {0.3, 1.0, 3.0, 10.0}) {
    const double knee = std::sqrt(g);
    const auto m = gaussian_moments([knee](double r) { return std::min(r, knee); }, knee);
    EXPECT_NEAR(m.lambda, soft_limiter_lambda(g), 1e-9);
    EXPECT_NEAR(m.distortion, normalized_distortion_power(g, PaKind::kSoftLimiter), 1e-9);
  }
}

TEST(Pa, InvalidIboThrows) {
  EXPECT_THROW(bussgang_lambda(0.0, PaKind::kSoftLimiter), InvalidParameter);
  EXPECT_THROW(bussgang_lambda(-1.0, PaKind::kRapp), InvalidParameter);
  EXPECT_THROW(PAConfig::soft_limiter(2, -1.0), InvalidParameter);
  EXPECT_THROW(PAConfig::rapp(2, 1.0, 0.0), InvalidParameter);
}

TEST(Pa, CurveCsvHasHeaderAndPoints) {
  std::ostringstream os;
  write_pa_curve_csv(os, PAConfig::soft_limiter(1, 1.0), 0, 2.0, 5);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "input_amplitude,output_amplitude");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 6);
}

TEST(TxChain, DistortionUncorrelatedWithInput) {
  const auto H = channel::gen_rayleigh(1.0, 64, 4, 8);
  const auto cfg = OFDMConfig::centered(256, 64);
  TxChain chain(mrt_precoder(H), PAConfig::soft_limiter(4, 1.0), cfg, 1.0);
  std::complex<double> cross = 0.0;
  double power = 0.0;
  for (int s = 0; s < 200; ++s) {
    const auto f = chain.transmit_random(derive_seed(1, "symbols", s));
    cross += (f.d_hat.array() * f.y.conjugate().array()).sum();
    power += f.y.cwiseAbs2().sum();
  }
  EXPECT_LT(std::abs(cross) / power, 0.01);
}

TEST(TxChain, LinearRegimeHasNoDistortion) {
  const auto H = channel::gen_rayleigh(1.0, 12, 4, 9);
  TxChain chain(mrt_precoder(H), PAConfig::soft_limiter(4, 1.0), OFDMConfig::centered(64, 12), 1e6);
  const auto f = chain.transmit_random(3);
  EXPECT_LT(f.d_hat.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(TxChain, ParsevalTotalIncludesInband) {
  const auto H = channel::gen_rayleigh(1.0, 12, 4, 10);
  TxChain chain(mrt_precoder(H), PAConfig::soft_limiter(4, 1.0), OFDMConfig::centered(64, 12), 1.0);
  const auto f = chain.transmit_random(5);
  for (int k = 0; k < 4; ++k) {
    EXPECT_GT(f.d_total[k], 0.0);
    EXPECT_LE(f.d_inband[k], f.d_total[k] * (1 + 1e-12));
  }
}

TEST(TxChain, AntennaMismatchThrows) {
  const auto H = channel::gen_rayleigh(1.0, 12, 4, 1);
  EXPECT_THROW(TxChain(mrt_precoder(H), PAConfig::soft_limiter(3, 1.0), OFDMConfig::centered(64, 12), 1.0),
               ShapeMismatch);
}
