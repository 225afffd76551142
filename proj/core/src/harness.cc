#include "padist/harness.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <set>
#include <sstream>

#include "padist/allocation.h"
#include "padist/csv.h"
#include "padist/dataset.h"
#include "padist/error.h"
#include "padist/gev.h"
#include "padist/ks.h"
#include "padist/link.h"
#include "padist/model_io.h"
#include "padist/parallel.h"
#include "padist/prune.h"
#include "padist/random.h"
#include "padist/rxmetrics.h"
#include "padist/spatial.h"
#include "padist/training.h"

namespace padist::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;

fs::path OutputDir::path(const std::string& name) const {
  if (name.empty() || name.find('/') != std::string::npos ||
      name.find('\\') != std::string::npos || name == "." || name == "..") {
    throw InvalidParameter("output name '" + name + "' must be a plain file name");
  }
  return root_ / name;
}

void OutputDir::ensure() const {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_)) {
    throw IoError("cannot create output directory '" + root_.string() + "': " + ec.message());
  }
}

void OutputDir::write(const std::string& name, const std::string& bytes) {
  const fs::path final_path = path(name);
  ensure();
  const fs::path tmp = root_ / ("." + name + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write '" + tmp.string() + "'");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, final_path, ec);
  if (ec) throw IoError("cannot rename into '" + final_path.string() + "': " + ec.message());
  outputs_[name] = hex64(fnv1a64(bytes));
}

void OutputDir::record(const std::string& name) { outputs_[name] = file_hash(path(name)); }

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string file_hash(const fs::path& p) { return hex64(fnv1a64(read_file(p))); }

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string gamma_tag(double g) {
  std::string s = csv::fmt_double(g);
  if (!s.empty() && s[0] == '-') s[0] = 'm';
  return s + "dB";
}

struct Run {
  const ExperimentConfig& cfg;
  const CommandInputs& in;
  OutputDir out;
  json inputs = json::object();
  json metrics = json::object();

  fs::path input_path(const std::string& given, const std::string& fallback) const {
    return given.empty() ? out.root() / fallback : fs::path(given);
  }
  void require_input(const std::string& role, const fs::path& p) {
    if (!fs::is_regular_file(p)) {
      throw IoError(role + " input '" + p.string() + "' does not exist");
    }
  }
  void note_input(const std::string& role, const fs::path& p) {
    inputs[role] = {{"file", p.filename().string()}, {"hash", file_hash(p)}};
  }
};

link::LinkConfig link_at(const ExperimentConfig& cfg, double gamma_db) {
  link::LinkConfig l = cfg.link;
  l.gamma_avg = rx::from_db(gamma_db);
  return l;
}

void cmd_simulate_sdr(Run& r) {
  const auto& cfg = r.cfg;
  const auto& sc = cfg.scenario;
  const int n = sc.num_ues();
  const int K = sc.geometry.num_antennas();
  const auto channels = parallel_map(n, cfg.threads, [&](std::size_t u) {
    return channel::ue_channel(sc, static_cast<int>(u), cfg.seed);
  });
  std::vector<std::vector<int>> victims(n);
  for (int u = 0; u < n; ++u) {
    const auto perm = ml::permutation(n - 1, derive_seed(cfg.seed, "victims", u));
    for (int i = 0; i < cfg.sdr.victims_per_ue; ++i) {
      const int v = static_cast<int>(perm[i]);
      victims[u].push_back(v >= u ? v + 1 : v);
    }
  }

  std::ostringstream sched_os, vict_os;
  csv::Writer sched(sched_os), vict(vict_os);
  sched.header({"ue_id", "ix", "iy", "x", "y", "gamma_db", "sdr_db", "theory_uncorrelated_db",
                "theory_correlated_db"});
  vict.header({"scheduled_ue", "victim_ue", "gamma_db", "sdr_db", "theory_victim_db"});
  json per_gamma = json::array();
  std::vector<std::pair<std::string, std::string>> maps;
  for (double g_db : cfg.sdr.ibo_db) {
    const link::LinkConfig lc = link_at(cfg, g_db);
    const auto results = parallel_map(n, cfg.threads, [&](std::size_t u) {
      std::vector<channel::ChannelMatrix> vh;
      for (int v : victims[u]) vh.push_back(channels[v]);
      return link::simulate_link(channels[u], vh, lc, derive_seed(cfg.seed, "link", u));
    });
    const double th_unc = rx::to_db(rx::sdr_theory_uncorrelated(lc.gamma_avg, K, lc.pa_kind, lc.smoothness));
    const double th_cor = rx::to_db(rx::sdr_theory_correlated(lc.gamma_avg, lc.pa_kind, lc.smoothness));
    const double th_vic = rx::to_db(rx::sdr_theory_victim(lc.gamma_avg, lc.pa_kind, lc.smoothness));
    stat::SDRMap map(cfg.grid.nx, cfg.grid.ny, cfg.grid.resolution);
    double sum_s = 0.0, sum_v = 0.0;
    int cnt_s = 0, cnt_v = 0;
    for (int u = 0; u < n; ++u) {
      const int ix = u % cfg.grid.nx, iy = u / cfg.grid.nx;
      const auto& pos = sc.ues.positions[u];
      const double s_db = rx::to_db(results[u].sdr_scheduled());
      map.at(ix, iy) = s_db;
      if (std::isfinite(s_db)) {
        sum_s += s_db;
        ++cnt_s;
      }
      sched.cell(u).cell(ix).cell(iy).cell(pos[0]).cell(pos[1]).cell(g_db).cell(s_db)
          .cell(th_unc).cell(th_cor);
      sched.end_row();
      for (std::size_t i = 0; i < victims[u].size(); ++i) {
        const double v_db = rx::to_db(results[u].sdr_victim(i));
        if (std::isfinite(v_db)) {
          sum_v += v_db;
          ++cnt_v;
        }
        vict.cell(u).cell(victims[u][i]).cell(g_db).cell(v_db).cell(th_vic);
        vict.end_row();
      }
    }
    std::ostringstream map_os;
    csv::Writer mw(map_os);
    std::vector<std::string> cols{"iy"};
    for (int ix = 0; ix < cfg.grid.nx; ++ix) cols.push_back("x" + std::to_string(ix));
    mw.header(cols);
    for (int iy = 0; iy < cfg.grid.ny; ++iy) {
      mw.cell(iy);
      for (int ix = 0; ix < cfg.grid.nx; ++ix) mw.cell(map.at(ix, iy));
      mw.end_row();
    }
    maps.emplace_back("sdr_map_" + gamma_tag(g_db) + ".csv", map_os.str());
    per_gamma.push_back({{"gamma_db", g_db},
                         {"mean_scheduled_sdr_db", finite_or_null(cnt_s ? sum_s / cnt_s : NAN)},
                         {"mean_victim_sdr_db", finite_or_null(cnt_v ? sum_v / cnt_v : NAN)},
                         {"theory_uncorrelated_db", th_unc},
                         {"theory_correlated_db", th_cor},
                         {"theory_victim_db", th_vic}});
  }
  for (const auto& [name, bytes] : maps) r.out.write(name, bytes);
  r.out.write("sdr_scheduled.csv", sched_os.str());
  r.out.write("sdr_victims.csv", vict_os.str());
  r.metrics["num_ues"] = n;
  r.metrics["num_antennas"] = K;
  r.metrics["victims_per_ue"] = cfg.sdr.victims_per_ue;
  r.metrics["per_gamma"] = per_gamma;
}

void cmd_fit_gev(Run& r) {
  const fs::path tp = r.input_path(r.in.table, "sdr_victims.csv");
  r.require_input("table", tp);
  const csv::Table t = csv::read_file(tp.string());
  r.note_input("table", tp);
  const int cg = t.column("gamma_db"), cs = t.column("sdr_db");
  std::vector<double> samples;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double g_db = t.number(i, cg);
    if (r.in.gamma_db && std::abs(g_db - *r.in.gamma_db) > 1e-9) continue;
    const double sdr = rx::from_db(t.number(i, cs));
    if (!std::isfinite(sdr)) {
      ++skipped;
      continue;
    }
    const double theory =
        rx::sdr_theory_victim(rx::from_db(g_db), r.cfg.link.pa_kind, r.cfg.link.smoothness);
    samples.push_back(sdr / theory);
  }
  const stat::GevFit fit = stat::gev_fit_mle(samples);
  const auto cdf = [&](double x) { return stat::gev_cdf(x, fit.params); };
  const stat::KsResult ks = stat::ks_test(samples, cdf, r.cfg.gev.ks_stride);

  json model = {
      {"distribution", "gev"},
      {"convention", "F(x) = exp(-(1 + xi (x - mu) / sigma)^(-1/xi))"},
      {"normalization", "measured victim SDR / theory victim SDR, linear"},
      {"params", {{"mu", fit.params.mu}, {"sigma", fit.params.sigma}, {"xi", fit.params.xi}}},
      {"std_error",
       {{"mu", finite_or_null(fit.std_error[0])},
        {"sigma", finite_or_null(fit.std_error[1])},
        {"xi", finite_or_null(fit.std_error[2])}}},
      {"loglik", fit.loglik},
      {"n", fit.n},
      {"skipped_nonfinite", skipped},
      {"evaluations", fit.evaluations},
      {"ks",
       {{"statistic", ks.statistic},
        {"p_value", ks.p_value},
        {"n", ks.n},
        {"stride", r.cfg.gev.ks_stride}}}};
  if (r.in.gamma_db) model["gamma_db"] = *r.in.gamma_db;
  r.out.write("gev.json", model.dump(2) + "\n");

  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t step = std::max<std::size_t>(1, sorted.size() / 500);
  std::ostringstream os;
  csv::Writer w(os);
  w.header({"x", "empirical_cdf", "fitted_cdf"});
  for (std::size_t i = 0; i < sorted.size(); i += step) {
    w.cell(sorted[i]).cell((i + 0.5) / sorted.size()).cell(cdf(sorted[i]));
    w.end_row();
  }
  r.out.write("gev_cdf.csv", os.str());
  r.metrics = {{"mu", fit.params.mu},
               {"sigma", fit.params.sigma},
               {"xi", fit.params.xi},
               {"n", fit.n},
               {"ks_p_value", ks.p_value}};
}

void cmd_autocorr(Run& r) {
  const fs::path tp = r.input_path(r.in.table, "sdr_scheduled.csv");
  r.require_input("table", tp);
  const csv::Table t = csv::read_file(tp.string());
  r.note_input("table", tp);
  const int cx = t.column("ix"), cy = t.column("iy"), cg = t.column("gamma_db"),
            cs = t.column("sdr_db");
  int nx = 0, ny = 0;
  std::vector<double> gammas;
  for (std::size_t i = 0; i < t.size(); ++i) {
    nx = std::max(nx, static_cast<int>(t.number(i, cx)) + 1);
    ny = std::max(ny, static_cast<int>(t.number(i, cy)) + 1);
    const double g = t.number(i, cg);
    if (std::find(gammas.begin(), gammas.end(), g) == gammas.end()) gammas.push_back(g);
  }
  if (r.in.gamma_db) gammas = {*r.in.gamma_db};
  if (gammas.empty()) throw InsufficientData("autocorr: empty SDR table");
  const double res = r.cfg.grid.resolution;
  std::ostringstream os;
  csv::Writer w(os);
  w.header({"gamma_db", "lag", "distance_m", "acf", "pairs"});
  json per_gamma = json::array();
  for (double g : gammas) {
    stat::SDRMap map(nx, ny, res);
    map.valid.assign(map.values.size(), 0);
    std::size_t filled = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.number(i, cg) != g) continue;
      const double v = t.number(i, cs);
      if (!std::isfinite(v)) continue;
      const int ix = static_cast<int>(t.number(i, cx)), iy = static_cast<int>(t.number(i, cy));
      map.at(ix, iy) = v;
      map.valid[static_cast<std::size_t>(iy) * nx + ix] = 1;
      ++filled;
    }
    if (filled == 0) throw InsufficientData("autocorr: no rows at gamma " + csv::fmt_double(g) + " dB");
    const stat::Autocorrelation a = stat::spatial_autocorrelation(map);
    const stat::Decorrelation d = stat::decorrelation_distance(a.acf, res);
    for (std::size_t lag = 0; lag < a.acf.size(); ++lag) {
      w.cell(g).cell(lag).cell(lag * res).cell(a.acf[lag]).cell(static_cast<long long>(a.pairs[lag]));
      w.end_row();
    }
    per_gamma.push_back({{"gamma_db", g},
                         {"decorrelation_m", finite_or_null(d.distance)},
                         {"crossed", d.crossed},
                         {"below_resolution", d.below_resolution}});
  }
  r.out.write("autocorr.csv", os.str());
  r.metrics = {{"grid", {nx, ny}}, {"resolution_m", res}, {"per_gamma", per_gamma}};
}

ml::Dataset load_dataset(Run& r) {
  const fs::path p = r.input_path(r.in.dataset, "dataset.bin");
  r.require_input("dataset", p);
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot open dataset '" + p.string() + "'");
  ml::Dataset ds = ml::read_dataset_binary(is);
  r.note_input("dataset", p);
  if (ds.input_size != r.cfg.arch.input_size) {
    throw ConfigError("dataset feature size " + std::to_string(ds.input_size) +
                      " differs from the configured antenna count " +
                      std::to_string(r.cfg.arch.input_size));
  }
  return ds;
}

ml::CNNModel load_model_input(Run& r) {
  const fs::path p = r.input_path(r.in.model, "model.json");
  r.require_input("model", p);
  ml::CNNModel m = ml::load_model(p);
  r.note_input("model", p);
  return m;
}

json eval_json(const ml::EvalMetrics& m) {
  return {{"mape", m.mape}, {"rmse_db", m.rmse_db}, {"mae_db", m.mae_db}, {"n", m.n}};
}

void cmd_dataset(Run& r) {
  const auto& cfg = r.cfg;
  ml::DatasetSpec spec;
  spec.scenario = cfg.scenario;
  spec.link = cfg.link;
  spec.ibo_db = cfg.dataset.train_ibo_db;
  spec.seed = cfg.seed;
  spec.threads = cfg.threads;
  ml::BuildReport rep;
  ml::Dataset ds = ml::build_dataset(spec, &rep);
  ml::split_train_val(ds, cfg.dataset.val_fraction, cfg.seed);
  std::size_t skipped = rep.skipped.size();
  if (!cfg.dataset.test_ibo_db.empty()) {
    spec.ibo_db = cfg.dataset.test_ibo_db;
    spec.split = ml::Split::kTest;
    ml::BuildReport trep;
    for (auto& rec : ml::build_dataset(spec, &trep).records) ds.records.push_back(std::move(rec));
    skipped += trep.skipped.size();
  }
  std::ostringstream bin, text;
  ml::write_dataset_binary(bin, ds);
  ml::write_dataset_csv(text, ds);
  r.out.write("dataset.bin", bin.str());
  r.out.write("dataset.csv", text.str());
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& rec : ds.records) {
    lo = std::min(lo, rec.label_db);
    hi = std::max(hi, rec.label_db);
  }
  r.metrics = {{"records", ds.size()},
               {"train", ds.indices(ml::Split::kTrain).size()},
               {"val", ds.indices(ml::Split::kVal).size()},
               {"test", ds.indices(ml::Split::kTest).size()},
               {"skipped", skipped},
               {"label_min_db", finite_or_null(lo)},
               {"label_max_db", finite_or_null(hi)}};
}

void cmd_train(Run& r) {
  const ml::Dataset ds = load_dataset(r);
  const std::string hash = config_hash(r.cfg);
  const fs::path ckpt = r.out.root() / "checkpoint.json";
  ml::TrainerState st;
  if (r.in.resume) {
    r.require_input("checkpoint", ckpt);
    st = ml::load_checkpoint(ckpt, hash);
    if (st.model.arch.describe() != r.cfg.arch.describe()) {
      throw ConfigError("checkpoint architecture differs from the config");
    }
  } else {
    st = ml::init_trainer(ds, r.cfg.arch, r.cfg.train);
  }
  r.metrics["resumed_from_epoch"] = st.epoch;
  r.out.ensure();
  ml::train_epochs(st, ds, r.cfg.train, [&](const ml::TrainerState& s) {
    ml::save_checkpoint(s, ckpt, hash);
  });
  if (st.epoch == 0 || !fs::exists(ckpt)) ml::save_checkpoint(st, ckpt, hash);
  r.out.record("checkpoint.json");
  r.out.record("checkpoint.weights");
  ml::save_model(st.model, r.out.path("model.json"));
  r.out.record("model.json");
  r.out.record("model.weights");

  std::ostringstream os;
  csv::Writer w(os);
  w.header({"epoch", "train_loss", "val_mape"});
  const auto& meta = st.model.meta;
  for (std::size_t e = 0; e < meta.train_loss.size(); ++e) {
    w.cell(e + 1).cell(meta.train_loss[e]).cell(e < meta.val_loss.size() ? meta.val_loss[e] : NAN);
    w.end_row();
  }
  r.out.write("train_log.csv", os.str());
  r.metrics["epochs"] = st.epoch;
  r.metrics["num_params"] = st.model.num_params();
  for (auto s : {ml::Split::kVal, ml::Split::kTest}) {
    if (!ds.indices(s).empty()) r.metrics[ml::to_string(s)] = eval_json(ml::evaluate(st.model, ds, s));
  }
}

void cmd_eval(Run& r) {
  const ml::Dataset ds = load_dataset(r);
  const ml::CNNModel model = load_model_input(r);
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto pred = ml::predict(model, ds, all, r.cfg.threads);
  std::ostringstream os;
  csv::Writer w(os);
  w.header({"ue_id", "gamma_db", "split", "label_db", "predicted_db"});
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& rec = ds.records[i];
    w.cell(rec.ue_id).cell(rec.gamma_db).cell(ml::to_string(rec.split)).cell(rec.label_db)
        .cell(pred[i]);
    w.end_row();
  }
  r.out.write("predictions.csv", os.str());
  r.metrics["nonzero_params"] = model.num_nonzero();
  r.metrics["num_params"] = model.num_params();
  for (auto s : {ml::Split::kTrain, ml::Split::kVal, ml::Split::kTest}) {
    if (!ds.indices(s).empty()) r.metrics[ml::to_string(s)] = eval_json(ml::evaluate(model, ds, s));
  }
}

void cmd_prune(Run& r) {
  const ml::Dataset ds = load_dataset(r);
  const ml::CNNModel model = load_model_input(r);
  const ml::Split split = ds.indices(ml::Split::kTest).empty() ? ml::Split::kVal : ml::Split::kTest;
  const ml::EvalMetrics base = ml::evaluate(model, ds, split);
  ml::PruneReport rep;
  ml::CNNModel pruned = ml::prune_magnitude(model, r.cfg.prune.sparsity, &rep);
  const ml::EvalMetrics one_shot = ml::evaluate(pruned, ds, split);
  ml::EvalMetrics final_m = one_shot;
  if (r.cfg.prune.fine_tune_epochs > 0) {
    ml::TrainConfig tc = r.cfg.train;
    tc.epochs = r.cfg.prune.fine_tune_epochs;
    tc.learning_rate = r.cfg.prune.fine_tune_learning_rate;
    tc.seed = derive_seed(r.cfg.seed, "fine_tune");
    pruned = ml::fine_tune(pruned, ds, tc);
    final_m = ml::evaluate(pruned, ds, split);
  }
  r.out.ensure();
  ml::save_model(pruned, r.out.path("pruned_model.json"));
  r.out.record("pruned_model.json");
  r.out.record("pruned_model.weights");
  std::ostringstream os;
  csv::Writer w(os);
  w.header({"target_sparsity", "sparsity", "nonzero", "total", "split", "mape_unpruned",
            "mape_pruned", "mape_fine_tuned", "degradation_pp"});
  const double degradation = 100.0 * (final_m.mape - base.mape);
  w.cell(r.cfg.prune.sparsity).cell(rep.sparsity()).cell(rep.nonzero_after).cell(rep.total_params)
      .cell(ml::to_string(split)).cell(base.mape).cell(one_shot.mape).cell(final_m.mape)
      .cell(degradation);
  w.end_row();
  r.out.write("prune.csv", os.str());
  r.metrics = {{"target_sparsity", r.cfg.prune.sparsity},
               {"sparsity", rep.sparsity()},
               {"nonzero", rep.nonzero_after},
               {"total", rep.total_params},
               {"filters_removed", rep.filters_removed},
               {"connections_removed", rep.connections_removed},
               {"split", ml::to_string(split)},
               {"mape_unpruned", base.mape},
               {"mape_pruned", one_shot.mape},
               {"mape_fine_tuned", final_m.mape},
               {"fine_tune_epochs", r.cfg.prune.fine_tune_epochs},
               {"degradation_pp", degradation}};
}

void cmd_allocate(Run& r) {
  const auto& cfg = r.cfg;
  alloc::AllocationConfig ac;
  ac.ibo_candidates_db = cfg.allocate.ibo_candidates_db;
  ac.sigma_interf = alloc::dbm_to_watts(cfg.allocate.sigma_interf_dbm);
  ac.subcarrier_spacing = cfg.scenario.subcarrier_spacing;
  ac.link = cfg.link;
  ac.seed = derive_seed(cfg.seed, "allocate");
  ac.validate();
  const uint64_t channel_seed =
      cfg.allocate.channel_seed.value_or(derive_seed(cfg.seed, "allocate_channels"));

  std::optional<ml::CNNModel> model;
  std::unique_ptr<alloc::SdrPredictor> pred;
  switch (cfg.allocate.predictor) {
    case PredictorKind::kCnn:
      model = load_model_input(r);
      if (model->arch.input_size != cfg.scenario.geometry.num_antennas()) {
        throw ConfigError("model input size differs from the scenario antenna count");
      }
      pred = std::make_unique<alloc::CnnPredictor>(*model);
      break;
    case PredictorKind::kOracle:
      pred = std::make_unique<alloc::OraclePredictor>(ac.link, ac.seed);
      break;
    case PredictorKind::kTheory:
    case PredictorKind::kFixed:
      pred = std::make_unique<alloc::TheoryRayleighPredictor>(cfg.link.pa_kind, cfg.link.smoothness);
      break;
  }
  const auto& sc = cfg.scenario;
  const int n = sc.num_ues();
  struct PerUe {
    alloc::AllocationResult chosen, baseline;
  };
  const auto res = parallel_map(n, cfg.threads, [&](std::size_t u) {
    const auto H = channel::ue_channel(sc, static_cast<int>(u), channel_seed);
    PerUe p;
    p.baseline = alloc::fixed_ibo_baseline(H, cfg.allocate.fixed_ibo_db, ac, *pred);
    switch (cfg.allocate.predictor) {
      case PredictorKind::kOracle: p.chosen = alloc::oracle_ibo(H, ac); break;
      case PredictorKind::kFixed: p.chosen = p.baseline; break;
      default: p.chosen = alloc::allocate_ibo(H, ac, *pred); break;
    }
    return p;
  });
  std::vector<alloc::AllocationResult> chosen, baseline;
  for (const auto& p : res) {
    chosen.push_back(p.chosen);
    baseline.push_back(p.baseline);
  }
  const alloc::RatioReport rr = alloc::rate_ratio_report(chosen, baseline);

  std::ostringstream os;
  csv::Writer w(os);
  w.header({"ue_id", "x", "y", "chosen_ibo_db", "predicted_sdr_db", "achieved_sndr_db",
            "rate_bps", "baseline_ibo_db", "baseline_rate_bps", "rate_ratio"});
  std::map<std::string, int> hist;
  double mean_ibo = 0.0;
  for (int u = 0; u < n; ++u) {
    const auto& c = chosen[u];
    const auto& b = baseline[u];
    const auto& pos = sc.ues.positions[u];
    w.cell(u).cell(pos[0]).cell(pos[1]).cell(c.chosen_ibo_db)
        .cell(c.candidates.at(c.chosen).sdr_db).cell(rx::to_db(c.achieved_sndr))
        .cell(c.achieved_rate_bps).cell(b.chosen_ibo_db).cell(b.achieved_rate_bps)
        .cell(rr.ratios[u]);
    w.end_row();
    ++hist[csv::fmt_double(c.chosen_ibo_db)];
    mean_ibo += c.chosen_ibo_db / n;
  }
  r.out.write("allocation.csv", os.str());

  std::vector<double> sorted = rr.ratios;
  std::sort(sorted.begin(), sorted.end());
  std::ostringstream cdf_os;
  csv::Writer cw(cdf_os);
  cw.header({"rate_ratio", "cdf"});
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cw.cell(sorted[i]).cell(static_cast<double>(i + 1) / sorted.size());
    cw.end_row();
  }
  r.out.write("rate_ratio_cdf.csv", cdf_os.str());
  r.metrics = {{"predictor", to_string(cfg.allocate.predictor)},
               {"sigma_interf_dbm", cfg.allocate.sigma_interf_dbm},
               {"fixed_ibo_db", cfg.allocate.fixed_ibo_db},
               {"num_ues", n},
               {"ratio_median", rr.median},
               {"ratio_p90", rr.p90},
               {"ratio_min", rr.min},
               {"ratio_max", rr.max},
               {"mean_chosen_ibo_db", mean_ibo},
               {"chosen_ibo_histogram", hist}};
}

void cmd_report(Run& r) {
  const fs::path root = r.out.root();
  if (!fs::is_directory(root)) throw IoError("output directory '" + root.string() + "' does not exist");
  std::vector<fs::path> manifests;
  for (const auto& e : fs::directory_iterator(root)) {
    const std::string name = e.path().filename().string();
    const std::string suffix = ".manifest.json";
    if (name.size() > suffix.size() && name.ends_with(suffix) && name != "report.manifest.json") {
      manifests.push_back(e.path());
    }
  }
  if (manifests.empty()) throw IoError("no manifests in '" + root.string() + "'");
  std::sort(manifests.begin(), manifests.end());
  json report = json::object();
  std::ostringstream os;
  csv::Writer w(os);
  w.header({"command", "metric", "value"});
  std::function<void(const std::string&, const std::string&, const json&)> flatten =
      [&](const std::string& cmd, const std::string& key, const json& v) {
        if (v.is_number()) {
          w.cell(cmd).cell(key).cell(v.get<double>());
          w.end_row();
        } else if (v.is_boolean()) {
          w.cell(cmd).cell(key).cell(v.get<bool>() ? 1 : 0);
          w.end_row();
        } else if (v.is_object()) {
          for (auto it = v.begin(); it != v.end(); ++it) {
            flatten(cmd, key.empty() ? it.key() : key + "." + it.key(), it.value());
          }
        } else if (v.is_array()) {
          for (std::size_t i = 0; i < v.size(); ++i) {
            flatten(cmd, key + "[" + std::to_string(i) + "]", v[i]);
          }
        }
      };
  for (const auto& p : manifests) {
    json m;
    try {
      m = json::parse(read_file(p));
    } catch (const json::parse_error& e) {
      throw IoError("corrupt manifest '" + p.string() + "': " + e.what());
    }
    const std::string cmd = m.value("command", p.filename().string());
    report[cmd] = {{"config_hash", m.value("config_hash", "")}, {"metrics", m.value("metrics", json::object())}};
    flatten(cmd, "", report[cmd]["metrics"]);
    r.inputs[cmd] = {{"file", p.filename().string()}, {"hash", file_hash(p)}};
  }
  r.out.write("report.json", report.dump(2) + "\n");
  r.out.write("report.csv", os.str());
  r.metrics = {{"commands", manifests.size()}};
}

const std::map<std::string, void (*)(Run&)>& registry() {
  static const std::map<std::string, void (*)(Run&)> m{
      {"simulate-sdr", cmd_simulate_sdr}, {"fit-gev", cmd_fit_gev}, {"autocorr", cmd_autocorr},
      {"dataset", cmd_dataset},           {"train", cmd_train},     {"eval", cmd_eval},
      {"prune", cmd_prune},               {"allocate", cmd_allocate}, {"report", cmd_report}};
  return m;
}

}  // namespace

json run_command(const std::string& command, const ExperimentConfig& cfg,
                 const CommandInputs& inputs) {
  const auto& reg = registry();
  auto it = reg.find(command);
  if (it == reg.end()) throw ConfigError("unknown command '" + command + "'");
  cfg.validate();
  if (cfg.out_dir.empty()) throw ConfigError("no output directory (--out, PADIST_OUT or \"out\")");
  Run run{cfg, inputs, OutputDir(cfg.out_dir)};
  it->second(run);
  json manifest = {{"command", command},
                   {"version", kVersion},
                   {"config_hash", config_hash(cfg)},
                   {"seed", cfg.seed},
                   {"inputs", run.inputs},
                   {"outputs", run.out.outputs()},
                   {"metrics", run.metrics}};
  run.out.write(command + ".manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace padist::harness
