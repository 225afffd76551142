#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "padist/cnn.h"
#include "padist/dataset.h"

namespace padist::ml {

struct TrainConfig {
  int epochs = 25;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint64_t seed = 1;
  int threads = 1;
  // Start the output bias at the mean training label.
  bool init_output_bias = true;
  // Keep parameters that are exactly zero at the start of train_epochs at
  // zero (masked updates after pruning).
  bool preserve_zeros = false;

  void validate() const;
};

// Model plus Adam moments; enough to resume training bit-exactly.
struct TrainerState {
  CNNModel model;
  std::vector<double> m, v;
  long step = 0;
  int epoch = 0;
};

// Weight init (and optional output-bias init) without any update.
TrainerState init_trainer(const Dataset& ds, const CNNArch& arch, const TrainConfig& cfg);

using EpochCallback = std::function<void(const TrainerState&)>;

// Runs epochs state.epoch .. cfg.epochs - 1. Epoch e shuffles the training
// split with derive_seed(seed, "shuffle", e). Per-sample gradients are summed
// in batch order, so results do not depend on cfg.threads.
void train_epochs(TrainerState& state, const Dataset& ds, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

CNNModel train(const Dataset& ds, const CNNArch& arch, const TrainConfig& cfg);

// Masked retraining of a pruned model for cfg.epochs epochs with fresh Adam
// state; zero parameters stay zero. Loss history is appended to the model.
CNNModel fine_tune(const CNNModel& pruned, const Dataset& ds, TrainConfig cfg);

struct EvalMetrics {
  double mape = 0.0;  // fraction
  double rmse_db = 0.0;
  double mae_db = 0.0;
  std::size_t n = 0;
};

EvalMetrics evaluate(const CNNModel& model, const Dataset& ds, Split split);
EvalMetrics evaluate(const CNNModel& model, const Dataset& ds,
                     const std::vector<std::size_t>& idx);
std::vector<double> predict(const CNNModel& model, const Dataset& ds,
                            const std::vector<std::size_t>& idx, int threads = 1);

}  // namespace padist::ml
