#include "padist/config.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "padist/error.h"
#include "padist/random.h"

namespace padist::harness {

using json = nlohmann::json;

std::string to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::kCnn: return "cnn";
    case PredictorKind::kOracle: return "oracle";
    case PredictorKind::kTheory: return "theory";
    case PredictorKind::kFixed: return "fixed";
  }
  return "cnn";
}

namespace {

PredictorKind predictor_from_string(const std::string& s) {
  if (s == "cnn") return PredictorKind::kCnn;
  if (s == "oracle") return PredictorKind::kOracle;
  if (s == "theory") return PredictorKind::kTheory;
  if (s == "fixed") return PredictorKind::kFixed;
  throw InvalidParameter("unknown predictor '" + s + "' (cnn, oracle, theory, fixed)");
}

std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

}  // namespace

std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

LineIndex::LineIndex(std::string_view text) {
  struct Frame {
    bool object;
    std::string path;
    int index = 0;
    bool expect_key = false;
    std::string key;
  };
  std::vector<Frame> stack;
  int line = 1;
  auto child_path = [&]() -> std::string {
    if (stack.empty()) return "";
    const Frame& f = stack.back();
    if (f.object) return join_path(f.path, f.key);
    return f.path + "[" + std::to_string(f.index) + "]";
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
    } else if (c == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\' && i + 1 < text.size()) ++i;
        if (text[i] == '\n') ++line;
        s += text[i];
      }
      if (!stack.empty() && stack.back().object && stack.back().expect_key) {
        Frame& f = stack.back();
        f.key = s;
        f.expect_key = false;
        if (!lines_.emplace(join_path(f.path, s), line).second && duplicate_.empty()) {
          duplicate_ = join_path(f.path, s);
        }
      }
    } else if (c == '{' || c == '[') {
      stack.push_back({c == '{', child_path(), 0, c == '{', ""});
    } else if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
    } else if (c == ',') {
      if (!stack.empty()) {
        if (stack.back().object) stack.back().expect_key = true;
        else ++stack.back().index;
      }
    }
  }
}

int LineIndex::line_of(const std::string& path) const {
  auto it = lines_.find(path);
  return it == lines_.end() ? 0 : it->second;
}

namespace {

struct Ctx {
  const LineIndex& idx;
  std::string source;
};

[[noreturn]] void fail(const Ctx& c, const std::string& path, const std::string& msg) {
  std::string p = path;
  int line = c.idx.line_of(p);
  while (line == 0 && !p.empty()) {
    const auto pos = p.find_last_of(".[");
    p = pos == std::string::npos ? "" : p.substr(0, pos);
    line = c.idx.line_of(p);
  }
  throw ConfigError(c.source + ":" + (line > 0 ? std::to_string(line) : "1") + ": " +
                    (path.empty() ? "<root>" : path) + ": " + msg);
}

class Section {
 public:
  Section(const Ctx& c, const json& j, std::string path) : c_(c), j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(c_, path_, "expected a table");
  }

  bool has(const char* key) const { return j_.contains(key); }

  void opt(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(c_, at(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(c_, at(key), "must be finite");
    }
  }
  void opt(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) fail(c_, at(key), "expected an integer");
      const auto x = v->get<long long>();
      if (x < -2147483647LL || x > 2147483647LL) fail(c_, at(key), "integer out of range");
      out = static_cast<int>(x);
    }
  }
  void opt(const char* key, uint64_t& out) {
    if (const json* v = take(key)) {
      if (v->is_number_unsigned()) {
        out = v->get<uint64_t>();
      } else if (v->is_number_integer() && v->get<long long>() >= 0) {
        out = static_cast<uint64_t>(v->get<long long>());
      } else {
        fail(c_, at(key), "expected a non-negative integer");
      }
    }
  }
  void opt(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(c_, at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void opt(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(c_, at(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) {
          fail(c_, at(key) + "[" + std::to_string(i) + "]", "expected a number");
        }
        out.push_back((*v)[i].get<double>());
      }
    }
  }
  void opt(const char* key, std::vector<int>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(c_, at(key), "expected an array of integers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number_integer()) {
          fail(c_, at(key) + "[" + std::to_string(i) + "]", "expected an integer");
        }
        out.push_back((*v)[i].get<int>());
      }
    }
  }
  void opt(const char* key, channel::Vec3& out) {
    std::vector<double> v;
    if (!has(key)) return;
    opt(key, v);
    if (v.size() != 3) fail(c_, at(key), "expected [x, y, z]");
    out = {v[0], v[1], v[2]};
  }

  template <class T>
  void req(const char* key, T& out) {
    if (!has(key)) fail(c_, path_, std::string("missing required field '") + key + "'");
    opt(key, out);
  }

  // Calls f on the sub-table when present (or fails when required).
  template <class F>
  bool sub(const char* key, bool required, F&& f) {
    if (!has(key)) {
      if (required) fail(c_, path_, std::string("missing required table '") + key + "'");
      return false;
    }
    Section s(c_, *take(key), at(key));
    f(s);
    s.finish();
    return true;
  }

  // Runs a domain constructor/validator and reports its error at this path.
  template <class F>
  void check(const std::string& key, F&& f) {
    try {
      f();
    } catch (const InvalidParameter& e) {
      fail(c_, key.empty() ? path_ : at(key), e.what());
    }
  }

  std::string at(const std::string& key) const { return join_path(path_, key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(c_, at(it.key()), "unknown key");
    }
  }

 private:
  const json* take(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }

  const Ctx& c_;
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_config(Section& root, ExperimentConfig& cfg) {
  root.req("seed", cfg.seed);
  root.opt("threads", cfg.threads);
  root.opt("out", cfg.out_dir);
  root.check("threads", [&] {
    if (cfg.threads < 0) throw InvalidParameter("threads must be >= 0 (0 = all cores)");
  });

  int fft_size = 64, n_used = 12, n_cp = 0;
  root.sub("ofdm", true, [&](Section& s) {
    s.req("fft_size", fft_size);
    s.req("n_used", n_used);
    s.opt("n_cp", n_cp);
    s.check("", [&] { cfg.link.ofdm = tx::OFDMConfig::centered(fft_size, n_used, n_cp); });
  });

  root.sub("pa", true, [&](Section& s) {
    std::string kind = "soft_limiter";
    s.req("kind", kind);
    s.opt("smoothness", cfg.link.smoothness);
    s.opt("p_max", cfg.link.p_max);
    s.check("kind", [&] { cfg.link.pa_kind = tx::pa_kind_from_string(kind); });
    s.check("", [&] { cfg.link.make_pa(1); });
  });

  root.sub("link", false, [&](Section& s) {
    s.opt("num_symbols", cfg.link.num_symbols);
    s.check("num_symbols", [&] {
      if (cfg.link.num_symbols < 1) throw InvalidParameter("num_symbols must be >= 1");
    });
  });

  root.sub("scenario", true, [&](Section& s) {
    std::string model = "clustered";
    s.opt("model", model);
    s.check("model", [&] { cfg.scenario.model = channel::channel_model_from_string(model); });
    s.opt("carrier_frequency", cfg.carrier_frequency);
    s.sub("grid", true, [&](Section& g) {
      g.req("nx", cfg.grid.nx);
      g.req("ny", cfg.grid.ny);
      g.opt("resolution", cfg.grid.resolution);
      g.opt("origin", cfg.grid.origin);
    });
    channel::Vec3 bs{0.0, 0.0, 10.0};
    s.opt("bs_position", bs);
    s.check("grid", [&] {
      cfg.scenario.ues =
          channel::UEScenario::grid(cfg.grid.nx, cfg.grid.ny, cfg.grid.resolution, cfg.grid.origin, bs);
    });
    s.sub("array", false, [&](Section& a) {
      a.opt("rows", cfg.array.rows);
      a.opt("cols", cfg.array.cols);
      a.opt("spacing", cfg.array.spacing);
    });
    s.check("array", [&] {
      cfg.scenario.geometry =
          channel::ArrayGeometry::planar(cfg.array.rows, cfg.array.cols, cfg.array.spacing);
    });
    s.sub("cluster", false, [&](Section& c) {
      c.opt("num_clusters", cfg.scenario.cluster.num_clusters);
      c.opt("rays_per_cluster", cfg.scenario.cluster.rays_per_cluster);
      c.opt("delay_spread", cfg.scenario.cluster.delay_spread);
      c.opt("angular_spread", cfg.scenario.cluster.angular_spread);
      c.opt("shadow_sigma_db", cfg.scenario.cluster.shadow_sigma_db);
      c.check("", [&] { cfg.scenario.cluster.validate(); });
    });
    std::vector<double> k_range{cfg.scenario.rician_k_db_min, cfg.scenario.rician_k_db_max};
    s.opt("rician_k_db", k_range);
    s.check("rician_k_db", [&] {
      if (k_range.size() != 2) throw InvalidParameter("expected [min_db, max_db]");
      cfg.scenario.rician_k_db_min = k_range[0];
      cfg.scenario.rician_k_db_max = k_range[1];
    });
    s.opt("pathloss_exponent", cfg.scenario.pathloss_exponent);
    s.opt("ref_gain_db", cfg.scenario.ref_gain_db);
    s.opt("subcarrier_spacing", cfg.scenario.subcarrier_spacing);
    cfg.scenario.n_u = cfg.link.ofdm.num_used();
    s.check("", [&] { cfg.scenario.validate(); });
  });

  const int num_ues = cfg.scenario.num_ues();
  root.sub("sdr", false, [&](Section& s) {
    s.opt("ibo_db", cfg.sdr.ibo_db);
    s.opt("victims_per_ue", cfg.sdr.victims_per_ue);
    s.check("", [&] {
      if (cfg.sdr.ibo_db.empty()) throw InvalidParameter("ibo_db must not be empty");
      if (cfg.sdr.victims_per_ue < 0 || cfg.sdr.victims_per_ue >= num_ues) {
        throw InvalidParameter("victims_per_ue must be in [0, number of UEs)");
      }
    });
  });
  root.check("sdr", [&] {
    if (cfg.sdr.victims_per_ue >= num_ues) {
      throw InvalidParameter("victims_per_ue must be below the number of UEs");
    }
  });

  root.sub("gev", false, [&](Section& s) {
    uint64_t stride = cfg.gev.ks_stride;
    s.opt("ks_stride", stride);
    cfg.gev.ks_stride = static_cast<std::size_t>(stride);
    s.check("ks_stride", [&] {
      if (cfg.gev.ks_stride < 1) throw InvalidParameter("ks_stride must be >= 1");
    });
  });

  root.sub("dataset", false, [&](Section& s) {
    s.opt("train_ibo_db", cfg.dataset.train_ibo_db);
    s.opt("test_ibo_db", cfg.dataset.test_ibo_db);
    s.opt("val_fraction", cfg.dataset.val_fraction);
    s.check("", [&] {
      if (cfg.dataset.train_ibo_db.empty()) throw InvalidParameter("train_ibo_db must not be empty");
      if (!(cfg.dataset.val_fraction >= 0.0 && cfg.dataset.val_fraction < 1.0)) {
        throw InvalidParameter("val_fraction must be in [0, 1)");
      }
    });
  });

  cfg.arch.input_size = cfg.scenario.geometry.num_antennas();
  root.sub("arch", false, [&](Section& s) {
    std::vector<int> stage_layers, stage_filters;
    for (const auto& st : cfg.arch.stages) {
      stage_layers.push_back(st.num_layers);
      stage_filters.push_back(st.filters);
    }
    s.opt("stage_layers", stage_layers);
    s.opt("stage_filters", stage_filters);
    s.opt("dense", cfg.arch.dense);
    s.check("", [&] {
      if (stage_layers.size() != stage_filters.size()) {
        throw InvalidParameter("stage_layers and stage_filters differ in length");
      }
      cfg.arch.stages.clear();
      for (std::size_t i = 0; i < stage_layers.size(); ++i) {
        cfg.arch.stages.push_back({stage_layers[i], stage_filters[i]});
      }
    });
  });
  root.check("arch", [&] { cfg.arch.validate(); });

  cfg.train.seed = cfg.seed;
  cfg.train.threads = cfg.threads;
  root.sub("train", false, [&](Section& s) {
    s.opt("epochs", cfg.train.epochs);
    s.opt("batch_size", cfg.train.batch_size);
    s.opt("learning_rate", cfg.train.learning_rate);
    s.opt("beta1", cfg.train.beta1);
    s.opt("beta2", cfg.train.beta2);
    s.opt("epsilon", cfg.train.epsilon);
    s.check("", [&] { cfg.train.validate(); });
  });

  root.sub("prune", false, [&](Section& s) {
    s.opt("sparsity", cfg.prune.sparsity);
    s.opt("fine_tune_epochs", cfg.prune.fine_tune_epochs);
    s.opt("fine_tune_learning_rate", cfg.prune.fine_tune_learning_rate);
    s.check("", [&] {
      if (!(cfg.prune.sparsity >= 0.0 && cfg.prune.sparsity < 1.0)) {
        throw InvalidParameter("sparsity must be in [0, 1)");
      }
      if (cfg.prune.fine_tune_epochs < 0) throw InvalidParameter("fine_tune_epochs must be >= 0");
      if (!(cfg.prune.fine_tune_learning_rate > 0.0)) {
        throw InvalidParameter("fine_tune_learning_rate must be positive");
      }
    });
  });

  root.sub("allocate", false, [&](Section& s) {
    s.opt("ibo_candidates_db", cfg.allocate.ibo_candidates_db);
    s.opt("sigma_interf_dbm", cfg.allocate.sigma_interf_dbm);
    s.opt("fixed_ibo_db", cfg.allocate.fixed_ibo_db);
    std::string predictor = to_string(cfg.allocate.predictor);
    s.opt("predictor", predictor);
    s.check("predictor", [&] { cfg.allocate.predictor = predictor_from_string(predictor); });
    if (s.has("channel_seed")) {
      uint64_t cs = 0;
      s.opt("channel_seed", cs);
      cfg.allocate.channel_seed = cs;
    }
    s.check("ibo_candidates_db", [&] {
      if (cfg.allocate.ibo_candidates_db.empty()) {
        throw InvalidParameter("ibo_candidates_db must not be empty");
      }
    });
  });
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    if (threads < 0) throw InvalidParameter("threads must be >= 0");
    link.validate();
    scenario.validate();
    if (scenario.n_u != link.ofdm.num_used()) {
      throw InvalidParameter("scenario n_u differs from the OFDM used subcarriers");
    }
    if (sdr.ibo_db.empty()) throw InvalidParameter("sdr.ibo_db must not be empty");
    if (sdr.victims_per_ue < 0 || sdr.victims_per_ue >= scenario.num_ues()) {
      throw InvalidParameter("sdr.victims_per_ue must be in [0, number of UEs)");
    }
    if (gev.ks_stride < 1) throw InvalidParameter("gev.ks_stride must be >= 1");
    if (dataset.train_ibo_db.empty()) throw InvalidParameter("dataset.train_ibo_db is empty");
    arch.validate();
    if (arch.input_size != scenario.geometry.num_antennas()) {
      throw InvalidParameter("arch input size must equal the number of antennas");
    }
    train.validate();
    if (!(prune.sparsity >= 0.0 && prune.sparsity < 1.0)) {
      throw InvalidParameter("prune.sparsity must be in [0, 1)");
    }
    if (allocate.ibo_candidates_db.empty()) {
      throw InvalidParameter("allocate.ibo_candidates_db is empty");
    }
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": syntax error: " + e.what());
  }
  const LineIndex idx(text);
  const Ctx ctx{idx, source};
  if (!idx.duplicate_key().empty()) fail(ctx, idx.duplicate_key(), "duplicate key");
  ExperimentConfig cfg;
  Section root(ctx, j, "");
  read_config(root, cfg);
  root.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::optional<std::string> system_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

void apply_env_overrides(ExperimentConfig& cfg, const EnvLookup& env) {
  const std::string prefix = kEnvPrefix;
  if (auto v = env(prefix + "SEED")) {
    uint64_t seed = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), seed);
    if (ec != std::errc() || p != v->data() + v->size()) {
      throw ConfigError(prefix + "SEED: expected an unsigned integer, got '" + *v + "'");
    }
    cfg.seed = seed;
    cfg.train.seed = seed;
  }
  if (auto v = env(prefix + "THREADS")) {
    int threads = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), threads);
    if (ec != std::errc() || p != v->data() + v->size() || threads < 0) {
      throw ConfigError(prefix + "THREADS: expected a non-negative integer, got '" + *v + "'");
    }
    cfg.threads = threads;
    cfg.train.threads = threads;
  }
  if (auto v = env(prefix + "OUT")) {
    if (v->empty()) throw ConfigError(prefix + "OUT must not be empty");
    cfg.out_dir = *v;
  }
}

json config_to_json(const ExperimentConfig& c) {
  json stage_layers = json::array(), stage_filters = json::array();
  for (const auto& s : c.arch.stages) {
    stage_layers.push_back(s.num_layers);
    stage_filters.push_back(s.filters);
  }
  json j;
  j["seed"] = c.seed;
  j["ofdm"] = {{"fft_size", c.link.ofdm.fft_size},
               {"n_used", c.link.ofdm.num_used()},
               {"n_cp", c.link.ofdm.n_cp}};
  j["pa"] = {{"kind", tx::to_string(c.link.pa_kind)},
             {"smoothness", c.link.smoothness},
             {"p_max", c.link.p_max}};
  j["link"] = {{"num_symbols", c.link.num_symbols}};
  const auto& sc = c.scenario;
  j["scenario"] = {
      {"model", channel::to_string(sc.model)},
      {"carrier_frequency", c.carrier_frequency},
      {"grid",
       {{"nx", c.grid.nx},
        {"ny", c.grid.ny},
        {"resolution", c.grid.resolution},
        {"origin", c.grid.origin}}},
      {"bs_position", sc.ues.bs_position},
      {"array", {{"rows", c.array.rows}, {"cols", c.array.cols}, {"spacing", c.array.spacing}}},
      {"cluster",
       {{"num_clusters", sc.cluster.num_clusters},
        {"rays_per_cluster", sc.cluster.rays_per_cluster},
        {"delay_spread", sc.cluster.delay_spread},
        {"angular_spread", sc.cluster.angular_spread},
        {"shadow_sigma_db", sc.cluster.shadow_sigma_db}}},
      {"rician_k_db", {sc.rician_k_db_min, sc.rician_k_db_max}},
      {"pathloss_exponent", sc.pathloss_exponent},
      {"ref_gain_db", sc.ref_gain_db},
      {"subcarrier_spacing", sc.subcarrier_spacing}};
  j["sdr"] = {{"ibo_db", c.sdr.ibo_db}, {"victims_per_ue", c.sdr.victims_per_ue}};
  j["gev"] = {{"ks_stride", c.gev.ks_stride}};
  j["dataset"] = {{"train_ibo_db", c.dataset.train_ibo_db},
                  {"test_ibo_db", c.dataset.test_ibo_db},
                  {"val_fraction", c.dataset.val_fraction}};
  j["arch"] = {{"stage_layers", stage_layers},
               {"stage_filters", stage_filters},
               {"dense", c.arch.dense}};
  j["train"] = {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"epsilon", c.train.epsilon}};
  j["prune"] = {{"sparsity", c.prune.sparsity},
                {"fine_tune_epochs", c.prune.fine_tune_epochs},
                {"fine_tune_learning_rate", c.prune.fine_tune_learning_rate}};
  j["allocate"] = {{"ibo_candidates_db", c.allocate.ibo_candidates_db},
                   {"sigma_interf_dbm", c.allocate.sigma_interf_dbm},
                   {"fixed_ibo_db", c.allocate.fixed_ibo_db},
                   {"predictor", to_string(c.allocate.predictor)}};
  if (c.allocate.channel_seed) j["allocate"]["channel_seed"] = *c.allocate.channel_seed;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  return hex64(fnv1a64(config_to_json(cfg).dump()));
}

}  // namespace padist::harness
