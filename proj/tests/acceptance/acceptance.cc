#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "padist/allocation.h"
#include "padist/channel.h"
#include "padist/cnn.h"
#include "padist/dataset.h"
#include "padist/gev.h"
#include "padist/ks.h"
#include "padist/link.h"
#include "padist/pa.h"
#include "padist/prune.h"
#include "padist/random.h"
#include "padist/rxmetrics.h"
#include "padist/spatial.h"
#include "padist/training.h"

using namespace padist;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double db(double v) { return rx::to_db(v); }
double from_db(double v) { return rx::from_db(v); }

Outcome c1_bussgang() {
  constexpr int n = 1000000;
  Engine eng(derive_seed(1, "acceptance_bussgang"));
  std::vector<std::complex<double>> x(n);
  for (auto& v : x) v = complex_normal(eng, 1.0);
  double worst = 0.0;
  std::string where;
  for (auto kind : {tx::PaKind::kSoftLimiter, tx::PaKind::kRapp}) {
    for (double g : {0.5, 1.0, 2.0, 4.0}) {
      double num = 0.0, den = 0.0;
      for (const auto& v : x) {
        const double r = std::abs(v);
        num += tx::am_am(kind, r, g, 2.0) * r;
        den += r * r;
      }
      const double ref = tx::bussgang_lambda(g, kind, 2.0);
      const double rel = std::abs(num / den - ref) / ref;
      if (rel > worst) {
        worst = rel;
        where = fmt::format("{} gamma {}", tx::to_string(kind), g);
      }
    }
  }
  return {worst < 1e-3, fmt::format("max relative error {:.2e} ({}), limit 1e-3", worst, where)};
}

Outcome c2_victim_theory() {
  const double v = db(rx::sdr_theory_victim(from_db(3.0)));
  return {std::abs(v - 19.1) <= 0.1, fmt::format("{:.4f} dB, target 19.1 +- 0.1 dB", v)};
}

link::LinkConfig base_link(int fft, int n_u, double gamma_db, int symbols) {
  link::LinkConfig c;
  c.ofdm = tx::OFDMConfig::centered(fft, n_u);
  c.gamma_avg = from_db(gamma_db);
  c.num_symbols = symbols;
  return c;
}

Outcome c3_rayleigh() {
  const auto c = base_link(64, 12, 3.0, 100);
  const auto H = channel::gen_rayleigh(1.0, 12, 16, 100);
  const double sim = db(link::simulate_link(H, c, 0).sdr_scheduled());
  const double th = db(rx::sdr_theory_uncorrelated(c.gamma_avg, 16));
  return {std::abs(sim - th) <= 0.7,
          fmt::format("simulated {:.3f} dB, theory {:.3f} dB, gap {:.3f} dB", sim, th, sim - th)};
}

Outcome c4_los() {
  const auto c = base_link(2000, 400, 3.0, 20);
  const double th = db(rx::sdr_theory_correlated(c.gamma_avg));
  std::vector<double> v;
  for (int rows : {2, 4, 8}) {
    const auto H = channel::gen_los(1.0, 0.3, 0.4, channel::ArrayGeometry::planar(rows, rows), 400);
    v.push_back(db(link::simulate_link(H, c, 7).sdr_scheduled()));
  }
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double dev = 0.0;
  for (double s : v) dev = std::max(dev, std::abs(s - th));
  return {dev <= 0.5 && *hi - *lo <= 0.5,
          fmt::format("K=4/16/64: {:.3f} / {:.3f} / {:.3f} dB, theory {:.3f} dB, spread {:.3f} dB",
                      v[0], v[1], v[2], th, *hi - *lo)};
}

Outcome c5_slope() {
  const auto c = base_link(512, 100, 3.0, 100);
  std::vector<double> mean;
  for (int k : {8, 16, 32}) {
    double acc = 0.0;
    for (int s = 0; s < 3; ++s) {
      const auto H = channel::gen_rayleigh(1.0, 100, k, 55 + s);
      acc += db(link::simulate_link(H, c, s).sdr_scheduled()) / 3;
    }
    mean.push_back(acc);
  }
  const double s1 = mean[1] - mean[0], s2 = mean[2] - mean[1];
  return {std::abs(s1 - 3.0) <= 0.5 && std::abs(s2 - 3.0) <= 0.5,
          fmt::format("8->16: {:+.3f} dB, 16->32: {:+.3f} dB, target 3.0 +- 0.5", s1, s2)};
}

Outcome c6_inband() {
  bool ok = true;
  std::string detail;
  for (double g : {3.0, 6.0}) {
    const auto c = base_link(4000, 800, g, 40);
    const auto H = channel::gen_los(1.0, 0.3, 0.4, channel::ArrayGeometry::planar(2, 2), 800);
    const double f = link::simulate_link(H, c, 7).inband_fraction.value_or(NAN);
    ok = ok && std::abs(f - 2.0 / 3.0) <= 0.07;
    detail += fmt::format("{}gamma {} dB: {:.4f}", detail.empty() ? "" : ", ", g, f);
  }
  return {ok, detail + ", target 0.6667 +- 0.07"};
}

Outcome c7_sub_los() {
  const auto c = base_link(64, 12, 3.0, 100);
  channel::ClusterParams p;
  p.shadow_sigma_db = 8.0;
  p.los_azimuth = 0.3;
  p.los_elevation = 0.5;
  const double th = db(rx::sdr_theory_correlated(c.gamma_avg));
  int below = 0;
  double lowest = INFINITY;
  for (int s = 0; s < 100; ++s) {
    const auto H = channel::gen_clustered(1.0, p, channel::ArrayGeometry::planar(4, 4), 12, 15e3, s);
    const double v = db(link::simulate_link(H, c, s).sdr_scheduled());
    lowest = std::min(lowest, v);
    below += v <= th - 1.0;
  }
  return {below >= 1, fmt::format("{} of 100 seeds >= 1 dB below {:.3f} dB, lowest {:.3f} dB", below,
                                  th, lowest)};
}

Outcome c8_gev() {
  const stat::GEVParams truth{0.881, 0.4586, -0.0438};
  Engine eng(derive_seed(8, "acceptance_gev"));
  std::vector<double> fit_set(100000), held(20000);
  for (auto& v : fit_set) v = stat::gev_sample(truth, eng);
  for (auto& v : held) v = stat::gev_sample(truth, eng);
  const auto fit = stat::gev_fit_mle(fit_set);
  const double z[3] = {(fit.params.mu - truth.mu) / fit.std_error[0],
                       (fit.params.sigma - truth.sigma) / fit.std_error[1],
                       (fit.params.xi - truth.xi) / fit.std_error[2]};
  const auto ks = stat::ks_test(held, [&](double x) { return stat::gev_cdf(x, fit.params); });
  const bool ok = std::abs(z[0]) <= 3 && std::abs(z[1]) <= 3 && std::abs(z[2]) <= 3 && ks.p_value > 0.01;
  return {ok, fmt::format("mu {:.4f} sigma {:.4f} xi {:.4f}, |z| {:.2f} / {:.2f} / {:.2f}, KS p {:.3f}",
                          fit.params.mu, fit.params.sigma, fit.params.xi, std::abs(z[0]),
                          std::abs(z[1]), std::abs(z[2]), ks.p_value)};
}

Outcome c9_decorrelation() {
  const auto maps = stat::synthesize_exponential_maps(20, 64, 64, 4.0, 20.0, 20.0, 3.0, 0);
  std::vector<stat::Autocorrelation> parts;
  for (const auto& m : maps) parts.push_back(stat::spatial_autocorrelation(m));
  const auto d = stat::decorrelation_distance(stat::average_autocorrelation(parts).acf, 4.0);
  return {std::abs(d.distance - 20.0) <= 4.0,
          fmt::format("{:.2f} m over 20 maps, target 20 +- 4 m", d.distance)};
}

Outcome c10_gradcheck() {
  double worst = 0.0;
  int count = 0;
  for (int i = 0; i < 12; ++i) {
    ml::CNNArch a;
    a.input_size = 8 + 4 * (i % 3);
    a.stages = {{1 + i % 2, 2 + i % 4}};
    if (i % 3 == 2) a.stages.push_back({1, 3});
    a.dense = {4 + i};
    ml::CNNModel m(a);
    ml::init_weights(m, 100 + i);
    Engine eng(derive_seed(10, "acceptance_grad", i));
    for (const auto& l : m.layers) {
      for (std::size_t b = l.b_off; b < l.b_off + l.b_count; ++b) {
        m.params[b] = 0.1 * (uniform01(eng) - 0.5);
      }
    }
    std::vector<double> x(static_cast<std::size_t>(a.input_size) * a.input_size);
    for (auto& v : x) v = uniform01(eng);
    worst = std::max(worst, ml::backward_gradcheck(m, x, 15.0 + i));
    ++count;
  }
  return {worst < 1e-4, fmt::format("{} models, max relative error {:.2e}", count, worst)};
}

struct DeskMl {
  ml::Dataset ds;
  ml::CNNModel model;
};

const DeskMl& desk_ml() {
  static const DeskMl cache = [] {
    DeskMl d;
    ml::DatasetSpec spec;
    spec.scenario = channel::desk_scenario(25, 20);
    spec.link.ofdm = tx::OFDMConfig::centered(64, 12);
    spec.link.num_symbols = 100;
    spec.ibo_db = {-3, 0, 3, 6};
    spec.seed = 11;
    d.ds = ml::build_dataset(spec);
    ml::split_train_val(d.ds, 0.2, 3);
    spec.ibo_db = {-1, 2, 5};
    spec.split = ml::Split::kTest;
    for (auto& r : ml::build_dataset(spec).records) d.ds.records.push_back(std::move(r));
    ml::TrainConfig tc;
    tc.epochs = 25;
    tc.seed = 5;
    d.model = ml::train(d.ds, ml::CNNArch::desk(16), tc);
    return d;
  }();
  return cache;
}

Outcome c11_regression() {
  const auto& d = desk_ml();
  const std::size_t train_val = d.ds.indices(ml::Split::kTrain).size() + d.ds.indices(ml::Split::kVal).size();
  const auto m = ml::evaluate(d.model, d.ds, ml::Split::kTest);
  return {train_val >= 2000 && m.mape <= 0.05,
          fmt::format("{} train/val records, {} test, test MAPE {:.2f}%, RMSE {:.3f} dB", train_val,
                      m.n, 100 * m.mape, m.rmse_db)};
}

Outcome c12_pruning() {
  const auto& d = desk_ml();
  const double base = ml::evaluate(d.model, d.ds, ml::Split::kTest).mape;
  ml::PruneReport rep;
  const auto pruned = ml::prune_magnitude(d.model, 0.4, &rep);
  const double one_shot = ml::evaluate(pruned, d.ds, ml::Split::kTest).mape;
  ml::TrainConfig tc;
  tc.epochs = 2;
  tc.learning_rate = 3e-4;
  tc.seed = derive_seed(11, "fine_tune");
  const auto tuned = ml::fine_tune(pruned, d.ds, tc);
  const double fine = ml::evaluate(tuned, d.ds, ml::Split::kTest).mape;
  const double deg = 100 * (fine - base);
  return {deg <= 0.5 && tuned.num_nonzero() <= rep.nonzero_after,
          fmt::format("sparsity {:.3f}, MAPE {:.2f}% -> one-shot {:.2f}% -> fine-tuned {:.2f}% "
                      "({:+.2f} pp)",
                      rep.sparsity(), 100 * base, 100 * one_shot, 100 * fine, deg)};
}

struct AllocRun {
  std::vector<alloc::AllocationResult> oracle, cnn, fixed_theory, fixed_cnn;
};

alloc::AllocationConfig alloc_config(double sigma_dbm) {
  alloc::AllocationConfig ac;
  ac.link.ofdm = tx::OFDMConfig::centered(64, 12);
  ac.link.p_max = 2e-3;
  ac.seed = 99;
  ac.sigma_interf = alloc::dbm_to_watts(sigma_dbm);
  return ac;
}

const AllocRun& alloc_run(double sigma_dbm, bool with_oracle) {
  static std::map<std::pair<double, bool>, AllocRun> cache;
  const auto key = std::make_pair(sigma_dbm, with_oracle);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  AllocRun r;
  const auto sc = channel::desk_scenario(10, 10);
  const auto ac = alloc_config(sigma_dbm);
  const alloc::CnnPredictor cnn(desk_ml().model);
  const alloc::TheoryRayleighPredictor theory;
  for (int u = 0; u < sc.num_ues(); ++u) {
    const auto H = channel::ue_channel(sc, u, 777);
    if (with_oracle) {
      r.oracle.push_back(alloc::oracle_ibo(H, ac));
      r.fixed_theory.push_back(alloc::fixed_ibo_baseline(H, 6.0, ac, theory));
    }
    r.cnn.push_back(alloc::allocate_ibo(H, ac, cnn));
    r.fixed_cnn.push_back(alloc::fixed_ibo_baseline(H, 6.0, ac, cnn));
  }
  return cache.emplace(key, std::move(r)).first->second;
}

Outcome c13_dominance() {
  const auto& r = alloc_run(-64.0, true);
  const auto ro = alloc::rate_ratio_report(r.oracle, r.fixed_theory);
  const auto rc = alloc::rate_ratio_report(r.cnn, r.fixed_cnn);
  return {ro.min >= 0.98 && rc.median >= 1.0,
          fmt::format("{} UEs, oracle/fixed min {:.4f}, cnn/fixed median {:.4f} p90 {:.4f}",
                      ro.ratios.size(), ro.min, rc.median, rc.p90)};
}

Outcome c14_interference() {
  std::vector<double> mean;
  std::string detail;
  for (double s : {-54.0, -64.0, -74.0}) {
    const auto& r = alloc_run(s, false);
    double m = 0.0;
    for (const auto& a : r.cnn) m += a.chosen_ibo_db / r.cnn.size();
    mean.push_back(m);
    detail += fmt::format("{}{} dBm: {:.2f} dB", detail.empty() ? "" : ", ", s, m);
  }
  const bool ok = mean[0] <= mean[1] && mean[1] <= mean[2] && mean[0] < mean[2];
  return {ok, "mean chosen IBO " + detail};
}

struct Criterion {
  int id;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, 10, c1_bussgang},        {2, 1, c2_victim_theory},   {3, 60, c3_rayleigh},
      {4, 120, c4_los},            {5, 120, c5_slope},         {6, 60, c6_inband},
      {7, 300, c7_sub_los},        {8, 30, c8_gev},            {9, 30, c9_decorrelation},
      {10, 60, c10_gradcheck},     {11, 1200, c11_regression}, {12, 300, c12_pruning},
      {13, 600, c13_dominance},    {14, 600, c14_interference}};
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    fmt::print("{} criterion {:2d}: {} [{:.1f} s of {:.0f} s]{}\n", pass ? "PASS" : "FAIL", c.id,
               o.detail, dt, c.budget_s, in_time ? "" : " over budget");
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
