#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace padist::ml {

struct ConvStage {
  int num_layers = 2;
  int filters = 8;
};

// VGG-style regressor: 3x3 same-padding conv layers (ReLU), a 2x2 max-pool
// after every stage, ReLU dense layers and one linear output.
struct CNNArch {
  int input_size = 16;
  std::vector<ConvStage> stages;
  std::vector<int> dense;

  static CNNArch desk(int input_size = 16);
  void validate() const;
  std::string describe() const;
};

enum class LayerKind { kConv, kPool, kDense };

struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  int in_c = 0, in_h = 0, in_w = 0;
  int out_c = 0, out_h = 0, out_w = 0;
  std::size_t w_off = 0, w_count = 0;
  std::size_t b_off = 0, b_count = 0;
  bool relu = true;

  std::size_t in_size() const { return static_cast<std::size_t>(in_c) * in_h * in_w; }
  std::size_t out_size() const { return static_cast<std::size_t>(out_c) * out_h * out_w; }
  std::size_t fan_in() const;
};

// Layer table for an architecture; parameters are one flat array in layer order.
std::vector<LayerSpec> build_layout(const CNNArch& arch);

struct TrainingMeta {
  int epochs = 0;
  uint64_t seed = 0;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

struct CNNModel {
  CNNArch arch;
  std::vector<LayerSpec> layers;
  std::vector<double> params;
  TrainingMeta meta;

  CNNModel() = default;
  explicit CNNModel(const CNNArch& arch);  // all parameters zero

  std::size_t num_params() const { return params.size(); }
  std::size_t num_nonzero() const;
  double& output_bias() { return params[layers.back().b_off]; }
  void validate() const;
};

// Uniform(-sqrt(6 / fan_in), sqrt(6 / fan_in)) weights, zero biases.
void init_weights(CNNModel& model, uint64_t seed);

// Per-sample activations kept for the backward pass.
struct Workspace {
  std::vector<std::vector<double>> act;  // act[0] input, act[i + 1] output of layer i
  std::vector<std::vector<uint32_t>> argmax;
};

double forward(const CNNModel& model, std::span<const double> input);
double forward(const CNNModel& model, std::span<const double> input, Workspace& ws);

// Adds d(out)/d(params) * dout to grad.
void backward(const CNNModel& model, const Workspace& ws, double dout, std::span<double> grad);

// Mean of |pred - label| / |label|, as a fraction.
double mape_loss(std::span<const double> pred, std::span<const double> label);

// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-7) over all
// parameters for the single-sample MAPE loss, with central differences.
double backward_gradcheck(const CNNModel& model, std::span<const double> input, double label,
                          double epsilon = 1e-5);

}  // namespace padist::ml
