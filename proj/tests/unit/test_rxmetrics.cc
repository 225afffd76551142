#include <gtest/gtest.h>

#include <cmath>

#include "padist/channel.h"
#include "padist/error.h"
#include "padist/link.h"
#include "padist/rxmetrics.h"

using namespace padist;
using namespace padist::rx;

TEST(Theory, CorrelatedSdrOracle) {
  EXPECT_NEAR(to_db(sdr_theory_correlated(std::pow(10.0, 0.3))), 19.2233308385, 1e-8);
  EXPECT_NEAR(to_db(sdr_theory_correlated(1.0)), 13.8408945224, 1e-8);
  EXPECT_NEAR(to_db(sdr_theory_victim(std::pow(10.0, 0.6))), 29.4477576777, 1e-8);
}

TEST(Theory, UncorrelatedScalesWithK) {
  EXPECT_NEAR(to_db(sdr_theory_uncorrelated(std::pow(10.0, 0.3), 128)), 40.2954305350, 1e-8);
  const double g = 2.0;
  EXPECT_NEAR(to_db(sdr_theory_uncorrelated(g, 32)) - to_db(sdr_theory_uncorrelated(g, 16)),
              10 * std::log10(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(sdr_theory_uncorrelated(g, 1), sdr_theory_correlated(g));
}

TEST(Theory, VictimEqualsCorrelated) {
  for (double g : {0.5, 2.0, 8.0}) {
    EXPECT_DOUBLE_EQ(sdr_theory_victim(g), sdr_theory_correlated(g));
    EXPECT_DOUBLE_EQ(sdr_theory_victim(g, tx::PaKind::kRapp, 3.0),
                     sdr_theory_correlated(g, tx::PaKind::kRapp, 3.0));
  }
}

TEST(Theory, MonotoneInIbo) {
  double prev = 0.0;
  for (double g_db = -3; g_db <= 9; g_db += 1) {
    const double v = sdr_theory_correlated(from_db(g_db));
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_TRUE(std::isinf(sdr_theory_correlated(INFINITY)));
  EXPECT_THROW(sdr_theory_correlated(0.0), InvalidParameter);
  EXPECT_THROW(sdr_theory_uncorrelated(2.0, 0), InvalidParameter);
}

TEST(Theory, WantedPowerFormula) {
  EXPECT_DOUBLE_EQ(s_rx_theory(16, 0.5, 0.9, 2.0), 16 * 0.5 * 0.81 * 2.0);
  EXPECT_THROW(s_rx_theory(16, 0.0, 0.9, 2.0), InvalidParameter);
}

TEST(Sndr, RateArithmetic) {
  const auto r = sndr_and_rate(30.0, 1.0, 2.0, 1e6);
  EXPECT_DOUBLE_EQ(r.sndr, 10.0);
  EXPECT_NEAR(r.rate_bps, 1e6 * std::log2(11.0), 1e-6);
  EXPECT_TRUE(std::isinf(sndr_and_rate(1.0, 0.0, 0.0, 1.0).sndr));
  EXPECT_THROW(sndr_and_rate(-1.0, 0.0, 0.0, 1.0), InvalidParameter);
}

TEST(Sndr, DecibelConversions) {
  EXPECT_NEAR(to_db(100.0), 20.0, 1e-12);
  EXPECT_NEAR(from_db(-30.0), 1e-3, 1e-18);
}

TEST(Measured, LinearPaGivesInfiniteSdr) {
  link::LinkConfig cfg;
  cfg.gamma_avg = 1e9;
  cfg.num_symbols = 4;
  const auto H = channel::gen_rayleigh(1.0, 12, 4, 2);
  const auto r = link::simulate_link(H, cfg, 1);
  EXPECT_TRUE(std::isinf(r.sdr_scheduled()) || r.sdr_scheduled() > 1e15);
}

TEST(Measured, WantedPowerMatchesArrayGain) {
  link::LinkConfig cfg;
  cfg.gamma_avg = from_db(3.0);
  cfg.num_symbols = 50;
  const auto H = channel::gen_rayleigh(1.0, 12, 16, 3);
  const auto r = link::simulate_link(H, cfg, 2);
  double expected = 0.0;
  for (int n = 0; n < 12; ++n) {
    double s = 0.0;
    for (int k = 0; k < 16; ++k) s += r.lambda[k] * std::norm(H.H(n, k));
    expected += s * s / H.H.row(n).squaredNorm() * r.symbol_power;
  }
  EXPECT_NEAR(r.scheduled.total_wanted() / expected, 1.0, 0.05);
}

TEST(Measured, RayleighNearUncorrelatedTheory) {
  link::LinkConfig cfg;
  cfg.gamma_avg = from_db(3.0);
  cfg.num_symbols = 100;
  const auto H = channel::gen_rayleigh(1.0, 12, 16, 100);
  const auto r = link::simulate_link(H, cfg, 0);
  EXPECT_NEAR(to_db(r.sdr_scheduled()), to_db(sdr_theory_uncorrelated(cfg.gamma_avg, 16)), 0.7);
}

TEST(Measured, ShapeMismatchThrows) {
  const auto H = channel::gen_rayleigh(1.0, 10, 4, 1);
  EXPECT_THROW(receive_decompose({}, H, tx::OFDMConfig::centered(64, 12)), ShapeMismatch);
}

TEST(InbandFraction, MeasuredValueAtDeskBandwidth) {
  link::LinkConfig cfg;
  cfg.gamma_avg = 2.0;
  cfg.num_symbols = 200;
  const auto H = channel::gen_rayleigh(1.0, 12, 8, 4);
  const auto r = link::simulate_link(H, cfg, 6);
  ASSERT_TRUE(r.inband_fraction.has_value());
  EXPECT_NEAR(*r.inband_fraction, 0.51, 0.05);
}

TEST(InbandFraction, FullBandThrowsAndLinearIsEmpty) {
  tx::OFDMConfig full;
  full.fft_size = 12;
  full.subcarrier_map = {-6, -5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5};
  std::vector<tx::TxFrame> frames(1);
  EXPECT_THROW(inband_fraction(frames, full), InvalidParameter);
  link::LinkConfig cfg;
  cfg.gamma_avg = 1e12;
  cfg.num_symbols = 2;
  const auto r = link::simulate_link(channel::gen_rayleigh(1.0, 12, 2, 1), cfg, 1);
  EXPECT_FALSE(r.inband_fraction.has_value());
}

TEST(Link, DeterministicAndVictimsReported) {
  link::LinkConfig cfg;
  cfg.num_symbols = 10;
  const auto H = channel::gen_rayleigh(1.0, 12, 8, 1);
  std::vector<channel::ChannelMatrix> v{channel::gen_rayleigh(1.0, 12, 8, 2),
                                        channel::gen_rayleigh(1.0, 12, 8, 3)};
  const auto a = link::simulate_link(H, v, cfg, 9);
  const auto b = link::simulate_link(H, v, cfg, 9);
  ASSERT_EQ(a.victims.size(), 2u);
  EXPECT_DOUBLE_EQ(a.sdr_scheduled(), b.sdr_scheduled());
  EXPECT_DOUBLE_EQ(a.sdr_victim(1), b.sdr_victim(1));
  EXPECT_LT(a.sdr_victim(0), a.sdr_scheduled());
}

TEST(Link, InvalidConfigRejected) {
  link::LinkConfig cfg;
  cfg.num_symbols = 0;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  cfg.num_symbols = 1;
  cfg.gamma_avg = -1.0;
  EXPECT_THROW(cfg.validate(), InvalidParameter);
}
