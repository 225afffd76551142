#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include "padist/channel.h"
#include "padist/cnn.h"
#include "padist/dataset.h"
#include "padist/error.h"
#include "padist/feature.h"
#include "padist/model_io.h"
#include "padist/prune.h"
#include "padist/random.h"
#include "padist/scenario.h"
#include "padist/training.h"

using namespace padist;
using namespace padist::ml;
namespace fs = std::filesystem;

namespace {

CNNArch small_arch() {
  CNNArch a;
  a.input_size = 16;
  a.stages = {{1, 4}};
  a.dense = {16};
  return a;
}

DatasetSpec small_spec(uint64_t seed, int threads = 1) {
  DatasetSpec s;
  s.scenario = channel::desk_scenario(6, 4);
  s.link.num_symbols = 10;
  s.link.p_max = 2e-3;
  s.ibo_db = {0.0, 3.0};
  s.seed = seed;
  s.threads = threads;
  return s;
}

const Dataset& small_dataset() {
  static const Dataset ds = [] {
    Dataset d = build_dataset(small_spec(21));
    split_train_val(d, 0.25, 4);
    return d;
  }();
  return ds;
}

TrainConfig quick_train(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 8;
  c.seed = 6;
  return c;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("padist_ml_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cnn, DeskParameterCountMatchesHandCount) {
  const CNNModel m(CNNArch::desk());
  EXPECT_EQ(m.num_params(), 80u + 584u + 1168u + 2320u + 32896u + 129u);
  EXPECT_EQ(m.num_nonzero(), 0u);
}

TEST(Cnn, ZeroModelOutputsBias) {
  CNNModel m(CNNArch::desk());
  std::vector<double> x(256, 0.7);
  EXPECT_DOUBLE_EQ(forward(m, x), 0.0);
  m.output_bias() = 12.5;
  EXPECT_DOUBLE_EQ(forward(m, x), 12.5);
}

TEST(Cnn, GradientMatchesFiniteDifferences) {
  CNNModel m(small_arch());
  init_weights(m, 3);
  Engine eng(8);
  std::vector<double> x(256);
  for (auto& v : x) v = uniform01(eng);
  EXPECT_LT(backward_gradcheck(m, x, 20.0), 1e-4);
  CNNModel d(CNNArch::desk());
  init_weights(d, 4);
  EXPECT_LT(backward_gradcheck(d, x, 20.0), 1e-4);
}

TEST(Cnn, InvalidArchitectureRejected) {
  CNNArch a = small_arch();
  a.input_size = 3;
  a.stages = {{1, 4}, {1, 4}};
  EXPECT_THROW(a.validate(), InvalidParameter);
  CNNModel m(small_arch());
  std::vector<double> wrong(10, 0.0);
  EXPECT_THROW(forward(m, wrong), ShapeMismatch);
}

TEST(Cnn, MapeLoss) {
  const std::vector<double> p{11.0, 18.0}, y{10.0, 20.0};
  EXPECT_NEAR(mape_loss(p, y), 0.1, 1e-15);
}

TEST(Feature, LosChannelGivesInverseIbo) {
  const auto H = channel::gen_los(1e-6, 0.3, 0.4, channel::ArrayGeometry::planar(4, 4), 12);
  const auto fm = feature_matrix(H, 2.0);
  ASSERT_EQ(fm.size(), 16);
  EXPECT_NEAR(fm.F.minCoeff(), 0.5, 1e-12);
  EXPECT_NEAR(fm.F.maxCoeff(), 0.5, 1e-12);
}

TEST(Feature, DiagonalIsPerAntennaGainShare) {
  const auto H = channel::gen_rayleigh(2.0, 12, 16, 5);
  const auto fm = feature_matrix(H, 1.0);
  EXPECT_NEAR(fm.F.diagonal().mean(), 1.0, 1e-12);
  EXPECT_NEAR((fm.F - fm.F.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_THROW(feature_matrix(H, 0.0), InvalidParameter);
}

TEST(Dataset, SplitsAndLabels) {
  const auto& ds = small_dataset();
  EXPECT_EQ(ds.input_size, 16);
  EXPECT_EQ(ds.size(), 48u);
  EXPECT_EQ(ds.indices(Split::kVal).size(), 12u);
  EXPECT_EQ(ds.indices(Split::kTrain).size(), 36u);
  for (const auto& r : ds.records) {
    EXPECT_EQ(r.features.size(), 256u);
    EXPECT_TRUE(std::isfinite(r.label_db));
  }
}

TEST(Dataset, IndependentOfThreadCount) {
  const auto a = build_dataset(small_spec(21, 1));
  const auto b = build_dataset(small_spec(21, 3));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.records[i].label_db, b.records[i].label_db);
    EXPECT_EQ(a.records[i].features, b.records[i].features);
  }
}

TEST(Dataset, CsvAndBinaryRoundTrip) {
  const auto& ds = small_dataset();
  std::stringstream bin;
  write_dataset_binary(bin, ds);
  const auto b = read_dataset_binary(bin);
  ASSERT_EQ(b.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(b.records[i].features, ds.records[i].features);
    EXPECT_EQ(b.records[i].label_db, ds.records[i].label_db);
    EXPECT_EQ(b.records[i].split, ds.records[i].split);
  }
  std::stringstream csv;
  write_dataset_csv(csv, ds);
  const auto c = read_dataset_csv(csv);
  ASSERT_EQ(c.size(), ds.size());
  EXPECT_NEAR(c.records[5].label_db, ds.records[5].label_db, 1e-7 * std::abs(ds.records[5].label_db));
  EXPECT_EQ(c.records[5].ue_id, ds.records[5].ue_id);
}

TEST(Dataset, CorruptBinaryRejected) {
  std::stringstream junk("not a dataset at all");
  EXPECT_THROW(read_dataset_binary(junk), IoError);
}

TEST(Dataset, PermutationIsDeterministic) {
  const auto p = permutation(50, 9);
  EXPECT_EQ(p, permutation(50, 9));
  EXPECT_NE(p, permutation(50, 10));
  std::vector<std::size_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Training, ReducesValidationLoss) {
  const auto& ds = small_dataset();
  const auto m = train(ds, small_arch(), quick_train(8));
  ASSERT_EQ(m.meta.val_loss.size(), 8u);
  EXPECT_LT(m.meta.train_loss.back(), m.meta.train_loss.front());
  EXPECT_LT(evaluate(m, ds, Split::kVal).mape, 0.15);
}

TEST(Training, ResumeIsBitExact) {
  const auto& ds = small_dataset();
  const auto cfg = quick_train(4);
  const auto full = train(ds, small_arch(), cfg);

  auto st = init_trainer(ds, small_arch(), cfg);
  auto half = cfg;
  half.epochs = 2;
  train_epochs(st, ds, half);
  const auto dir = scratch("resume");
  save_checkpoint(st, dir / "checkpoint.json", "abc");
  auto restored = load_checkpoint(dir / "checkpoint.json", "abc");
  train_epochs(restored, ds, cfg);
  EXPECT_EQ(restored.model.params, full.params);
  EXPECT_THROW(load_checkpoint(dir / "checkpoint.json", "other"), ConfigError);
}

TEST(Training, ThreadCountDoesNotChangeWeights) {
  const auto& ds = small_dataset();
  auto c1 = quick_train(2), c3 = quick_train(2);
  c3.threads = 3;
  EXPECT_EQ(train(ds, small_arch(), c1).params, train(ds, small_arch(), c3).params);
}

TEST(Prune, ReachesTargetSparsity) {
  CNNModel m(CNNArch::desk());
  init_weights(m, 5);
  PruneReport rep;
  const auto p = prune_magnitude(m, 0.4, &rep);
  EXPECT_EQ(rep.total_params, m.num_params());
  EXPECT_NEAR(rep.sparsity(), 0.4, 0.01);
  EXPECT_EQ(p.num_nonzero(), rep.nonzero_after);
  EXPECT_THROW(prune_magnitude(m, 1.0), InvalidParameter);
}

TEST(Prune, RemovesSmallestDenseWeightsFirst) {
  CNNModel m(small_arch());
  init_weights(m, 7);
  const auto p = prune_magnitude(m, 0.3);
  const auto& dense = m.layers[m.layers.size() - 2];
  double kept_min = INFINITY, removed_max = 0.0;
  for (std::size_t i = dense.w_off; i < dense.w_off + dense.w_count; ++i) {
    if (p.params[i] == 0.0) removed_max = std::max(removed_max, std::abs(m.params[i]));
    else kept_min = std::min(kept_min, std::abs(m.params[i]));
  }
  EXPECT_LE(removed_max, kept_min);
}

TEST(Prune, FineTuneKeepsPrunedWeightsAtZero) {
  const auto& ds = small_dataset();
  const auto m = train(ds, small_arch(), quick_train(3));
  const auto p = prune_magnitude(m, 0.5);
  auto cfg = quick_train(2);
  cfg.learning_rate = 3e-4;
  const auto f = fine_tune(p, ds, cfg);
  for (std::size_t i = 0; i < p.num_params(); ++i) {
    if (p.params[i] == 0.0) ASSERT_EQ(f.params[i], 0.0) << i;
  }
  EXPECT_NE(f.params, p.params);
}

TEST(ModelIo, SaveLoadRoundTrip) {
  CNNModel m(CNNArch::desk());
  init_weights(m, 9);
  m.meta.epochs = 3;
  m.meta.train_loss = {0.3, 0.2, 0.1};
  const auto dir = scratch("io");
  save_model(m, dir / "model.json");
  EXPECT_TRUE(fs::exists(dir / "model.weights"));
  const auto r = load_model(dir / "model.json");
  EXPECT_EQ(r.params, m.params);
  EXPECT_EQ(r.arch.describe(), m.arch.describe());
  EXPECT_EQ(r.meta.train_loss, m.meta.train_loss);
  EXPECT_THROW(load_model(dir / "missing.json"), IoError);
}

TEST(ModelIo, ArchJsonRoundTrip) {
  const auto a = small_arch();
  EXPECT_EQ(arch_from_json(arch_to_json(a)).describe(), a.describe());
}
