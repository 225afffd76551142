#include <benchmark/benchmark.h>

#include <vector>

#include "padist/channel.h"
#include "padist/cnn.h"
#include "padist/feature.h"
#include "padist/gev.h"
#include "padist/link.h"
#include "padist/pa.h"
#include "padist/random.h"
#include "padist/spatial.h"
#include "padist/txchain.h"

using namespace padist;

static void BM_OfdmModulate(benchmark::State& state) {
  const int n_u = static_cast<int>(state.range(0));
  const tx::OfdmModulator mod(tx::OFDMConfig::centered(4 * n_u, n_u));
  const auto H = channel::gen_rayleigh(1.0, n_u, 16, 1);
  for (auto _ : state) benchmark::DoNotOptimize(mod.modulate(H.H));
}
BENCHMARK(BM_OfdmModulate)->Arg(12)->Arg(100)->Arg(400);

static void BM_PaApply(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  Engine eng(2);
  tx::CMatrix y(k, 256);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = complex_normal(eng, 1.0);
  const auto pa = tx::PAConfig::rapp(k, 1.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(tx::pa_apply(y, pa));
}
BENCHMARK(BM_PaApply)->Arg(16)->Arg(64);

static void BM_SimulateLink(benchmark::State& state) {
  link::LinkConfig cfg;
  cfg.num_symbols = static_cast<int>(state.range(0));
  const auto H = channel::gen_rayleigh(1.0, 12, 16, 3);
  for (auto _ : state) benchmark::DoNotOptimize(link::simulate_link(H, cfg, 4).sdr_scheduled());
}
BENCHMARK(BM_SimulateLink)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_FeatureMatrix(benchmark::State& state) {
  const auto H = channel::gen_rayleigh(1.0, 12, 16, 5);
  for (auto _ : state) benchmark::DoNotOptimize(ml::feature_matrix(H, 2.0));
}
BENCHMARK(BM_FeatureMatrix);

static void BM_CnnForward(benchmark::State& state) {
  ml::CNNModel m(ml::CNNArch::desk());
  ml::init_weights(m, 6);
  std::vector<double> x(256, 0.5);
  ml::Workspace ws;
  for (auto _ : state) benchmark::DoNotOptimize(ml::forward(m, x, ws));
}
BENCHMARK(BM_CnnForward);

static void BM_GevFit(benchmark::State& state) {
  const stat::GEVParams p{0.881, 0.4586, -0.0438};
  Engine eng(7);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = stat::gev_sample(p, eng);
  for (auto _ : state) benchmark::DoNotOptimize(stat::gev_fit_mle(x));
}
BENCHMARK(BM_GevFit)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_SpatialAutocorrelation(benchmark::State& state) {
  const auto m = stat::synthesize_exponential_map(64, 64, 4.0, 20.0, 20.0, 3.0, 8);
  for (auto _ : state) benchmark::DoNotOptimize(stat::spatial_autocorrelation(m));
}
BENCHMARK(BM_SpatialAutocorrelation)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
