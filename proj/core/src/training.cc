#include "padist/training.h"

#include <cmath>
#include <string>

#include "padist/error.h"
#include "padist/parallel.h"
#include "padist/random.h"

namespace padist::ml {

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidParameter("epochs must be >= 0");
  if (batch_size < 1) throw InvalidParameter("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidParameter("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidParameter("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw InvalidParameter("Adam epsilon must be positive");
}

TrainerState init_trainer(const Dataset& ds, const CNNArch& arch, const TrainConfig& cfg) {
  cfg.validate();
  ds.validate();
  if (arch.input_size != ds.input_size) {
    throw ShapeMismatch("arch input " + std::to_string(arch.input_size) + " vs dataset " +
                        std::to_string(ds.input_size));
  }
  const auto train_idx = ds.indices(Split::kTrain);
  if (train_idx.empty()) throw InvalidParameter("training split is empty");
  TrainerState st;
  st.model = CNNModel(arch);
  init_weights(st.model, cfg.seed);
  if (cfg.init_output_bias) {
    double mean = 0.0;
    for (std::size_t i : train_idx) mean += ds.records[i].label_db;
    st.model.output_bias() = mean / train_idx.size();
  }
  st.model.meta.seed = cfg.seed;
  st.m.assign(st.model.num_params(), 0.0);
  st.v.assign(st.model.num_params(), 0.0);
  return st;
}

void train_epochs(TrainerState& st, const Dataset& ds, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  const auto train_idx = ds.indices(Split::kTrain);
  const auto val_idx = ds.indices(Split::kVal);
  if (train_idx.empty()) throw InvalidParameter("training split is empty");
  CNNModel& model = st.model;
  const std::size_t P = model.num_params();
  std::vector<double> grad(P);
  std::vector<std::vector<double>> sample_grad(cfg.batch_size, std::vector<double>(P));
  std::vector<double> sample_loss(cfg.batch_size);
  std::vector<uint8_t> frozen;
  if (cfg.preserve_zeros) {
    frozen.resize(P);
    for (std::size_t i = 0; i < P; ++i) frozen[i] = model.params[i] == 0.0;
  }

  for (int epoch = st.epoch; epoch < cfg.epochs; ++epoch) {
    const auto perm = permutation(train_idx.size(), derive_seed(cfg.seed, "shuffle", epoch));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < perm.size(); start += cfg.batch_size) {
      const std::size_t bs = std::min<std::size_t>(cfg.batch_size, perm.size() - start);
      parallel_for(bs, cfg.threads, [&](std::size_t b) {
        const Record& r = ds.records[train_idx[perm[start + b]]];
        Workspace ws;
        const double pred = forward(model, r.features, ws);
        const double diff = pred - r.label_db;
        sample_loss[b] = std::abs(diff) / std::abs(r.label_db);
        auto& g = sample_grad[b];
        std::fill(g.begin(), g.end(), 0.0);
        const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        backward(model, ws, sgn / std::abs(r.label_db), g);
      });
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = 0; b < bs; ++b) {
        loss_sum += sample_loss[b];
        const auto& g = sample_grad[b];
        for (std::size_t i = 0; i < P; ++i) grad[i] += g[i];
      }
      ++st.step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
      const double inv = 1.0 / static_cast<double>(bs);
      for (std::size_t i = 0; i < P; ++i) {
        if (!frozen.empty() && frozen[i]) continue;
        const double g = grad[i] * inv;
        st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * g;
        st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * g * g;
        model.params[i] -= cfg.learning_rate * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + cfg.epsilon);
      }
    }
    const double train_loss = loss_sum / perm.size();
    const double val_loss =
        val_idx.empty() ? std::nan("") : evaluate(model, ds, val_idx).mape;
    if (!std::isfinite(train_loss) || (!val_idx.empty() && !std::isfinite(val_loss))) {
      throw TrainingFailure("training loss became non-finite", epoch);
    }
    for (double p : model.params) {
      if (!std::isfinite(p)) throw TrainingFailure("parameters became non-finite", epoch);
    }
    model.meta.train_loss.push_back(train_loss);
    model.meta.val_loss.push_back(val_loss);
    model.meta.epochs = epoch + 1;
    st.epoch = epoch + 1;
    if (on_epoch) on_epoch(st);
  }
}

CNNModel train(const Dataset& ds, const CNNArch& arch, const TrainConfig& cfg) {
  TrainerState st = init_trainer(ds, arch, cfg);
  train_epochs(st, ds, cfg);
  return std::move(st.model);
}

CNNModel fine_tune(const CNNModel& pruned, const Dataset& ds, TrainConfig cfg) {
  cfg.preserve_zeros = true;
  cfg.validate();
  pruned.validate();
  if (pruned.arch.input_size != ds.input_size) throw ShapeMismatch("fine_tune: input size");
  TrainerState st;
  st.model = pruned;
  st.m.assign(pruned.num_params(), 0.0);
  st.v.assign(pruned.num_params(), 0.0);
  const int done = st.model.meta.epochs;
  train_epochs(st, ds, cfg);
  st.model.meta.epochs = done + cfg.epochs;
  return std::move(st.model);
}

std::vector<double> predict(const CNNModel& model, const Dataset& ds,
                            const std::vector<std::size_t>& idx, int threads) {
  return parallel_map(idx.size(), threads, [&](std::size_t i) {
    return forward(model, ds.records.at(idx[i]).features);
  });
}

EvalMetrics evaluate(const CNNModel& model, const Dataset& ds,
                     const std::vector<std::size_t>& idx) {
  if (idx.empty()) throw InvalidParameter("evaluate: empty record set");
  EvalMetrics m;
  m.n = idx.size();
  double ape = 0.0, se = 0.0, ae = 0.0;
  for (std::size_t i : idx) {
    const Record& r = ds.records.at(i);
    const double e = forward(model, r.features) - r.label_db;
    ape += std::abs(e) / std::abs(r.label_db);
    se += e * e;
    ae += std::abs(e);
  }
  m.mape = ape / m.n;
  m.rmse_db = std::sqrt(se / m.n);
  m.mae_db = ae / m.n;
  return m;
}

EvalMetrics evaluate(const CNNModel& model, const Dataset& ds, Split split) {
  return evaluate(model, ds, ds.indices(split));
}

}  // namespace padist::ml
