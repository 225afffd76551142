#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "padist/allocation.h"
#include "padist/channel.h"
#include "padist/error.h"
#include "padist/rxmetrics.h"

using namespace padist;
using namespace padist::alloc;

namespace {

AllocationConfig small_config() {
  AllocationConfig c;
  c.link.num_symbols = 10;
  c.link.p_max = 2e-3;
  c.ibo_candidates_db = {2, 4, 6, 8};
  c.seed = 3;
  return c;
}

}  // namespace

TEST(Allocation, DbmToWatts) {
  EXPECT_NEAR(dbm_to_watts(-64.0), 3.9810717055349694e-10, 1e-24);
  EXPECT_DOUBLE_EQ(dbm_to_watts(30.0), 1.0);
}

TEST(Allocation, PercentileMatchesLinearInterpolation) {
  const std::vector<double> v{3, 1, 4, 1.5, 9, 2.6};
  EXPECT_NEAR(percentile(v, 0.5), 2.8, 1e-12);
  EXPECT_NEAR(percentile(v, 0.9), 6.5, 1e-12);
  EXPECT_NEAR(percentile(v, 0.1), 1.25, 1e-12);
  EXPECT_DOUBLE_EQ(percentile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(percentile(v, 1.0), 9.0);
  EXPECT_THROW(percentile({}, 0.5), InvalidParameter);
  EXPECT_THROW(percentile(v, 50), InvalidParameter);
}

TEST(Allocation, ChoosesArgmaxOfSndr) {
  const auto H = channel::gen_rayleigh(1e-7, 12, 16, 4);
  auto cfg = small_config();
  cfg.realize = false;
  const TheoryRayleighPredictor pred;
  const auto r = allocate_ibo(H, cfg, pred);
  ASSERT_EQ(r.candidates.size(), 4u);
  for (const auto& c : r.candidates) {
    EXPECT_NEAR(c.sndr, c.s_rx / (c.d_hat + cfg.sigma_interf), 1e-12 * c.sndr);
    EXPECT_LE(c.sndr, r.candidates[r.chosen].sndr);
    EXPECT_NEAR(c.sdr_db, rx::to_db(rx::sdr_theory_uncorrelated(std::pow(10.0, c.ibo_db / 10), 16)), 1e-9);
  }
  EXPECT_EQ(r.chosen_ibo_db, r.candidates[r.chosen].ibo_db);
}

TEST(Allocation, NoiseDominatedPrefersLowBackoff) {
  const auto H = channel::gen_rayleigh(1e-9, 12, 16, 4);
  auto cfg = small_config();
  cfg.realize = false;
  cfg.sigma_interf = 1.0;
  EXPECT_EQ(allocate_ibo(H, cfg, TheoryRayleighPredictor{}).chosen_ibo_db, 2.0);
  cfg.sigma_interf = 1e-30;
  EXPECT_EQ(allocate_ibo(H, cfg, TheoryRayleighPredictor{}).chosen_ibo_db, 8.0);
}

TEST(Allocation, FixedAgainstItselfGivesUnitRatio) {
  const auto cfg = small_config();
  std::vector<AllocationResult> a;
  for (uint64_t s = 0; s < 3; ++s) {
    a.push_back(fixed_ibo_baseline(channel::gen_rayleigh(1e-7, 12, 16, s), 6.0, cfg,
                                   TheoryRayleighPredictor{}));
  }
  const auto rep = rate_ratio_report(a, a);
  EXPECT_DOUBLE_EQ(rep.min, 1.0);
  EXPECT_DOUBLE_EQ(rep.max, 1.0);
  EXPECT_DOUBLE_EQ(rep.median, 1.0);
}

TEST(Allocation, OracleNeverLosesToFixed) {
  auto cfg = small_config();
  cfg.ibo_candidates_db = {2, 4, 6, 8};
  for (uint64_t s = 0; s < 3; ++s) {
    const auto H = channel::gen_rayleigh(1e-7, 12, 16, 10 + s);
    const auto o = oracle_ibo(H, cfg);
    const auto f = fixed_ibo_baseline(H, 6.0, cfg, TheoryRayleighPredictor{});
    EXPECT_GE(o.achieved_rate_bps, f.achieved_rate_bps * (1 - 1e-12));
  }
}

TEST(Allocation, InvalidConfigRejected) {
  auto cfg = small_config();
  cfg.ibo_candidates_db = {3.0};
  EXPECT_THROW(cfg.validate(), InvalidParameter);
  EXPECT_NO_THROW(cfg.validate(true));
  cfg.sigma_interf = -1.0;
  EXPECT_THROW(cfg.validate(true), InvalidParameter);
}
