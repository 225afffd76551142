#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "padist/cnn.h"
#include "padist/link.h"
#include "padist/scenario.h"
#include "padist/training.h"

namespace padist::harness {

struct GridSpec {
  int nx = 20;
  int ny = 10;
  double resolution = 4.0;
  channel::Vec3 origin{-40.0, 10.0, 1.5};
};

struct ArraySpec {
  int rows = 4;
  int cols = 4;
  double spacing = 0.5;  // wavelengths
};

struct SdrSection {
  std::vector<double> ibo_db{0.0, 3.0, 6.0};
  int victims_per_ue = 4;
};

struct GevSection {
  std::size_t ks_stride = 10;
};

struct DatasetSection {
  std::vector<double> train_ibo_db{-3.0, 0.0, 3.0, 6.0};
  std::vector<double> test_ibo_db{-1.0, 2.0, 5.0};
  double val_fraction = 0.2;
};

struct PruneSection {
  double sparsity = 0.4;
  int fine_tune_epochs = 2;
  double fine_tune_learning_rate = 3e-4;
};

enum class PredictorKind { kCnn, kOracle, kTheory, kFixed };
std::string to_string(PredictorKind k);

struct AllocateSection {
  std::vector<double> ibo_candidates_db{1, 2, 3, 4, 5, 6, 7, 8, 9};
  double sigma_interf_dbm = -64.0;
  double fixed_ibo_db = 6.0;
  PredictorKind predictor = PredictorKind::kCnn;
  // Channel realization seed for the allocation UEs; derived from the root
  // seed when absent.
  std::optional<uint64_t> channel_seed;
};

struct ExperimentConfig {
  uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  double carrier_frequency = 3.5e9;  // metadata only
  GridSpec grid;
  ArraySpec array;
  channel::Scenario scenario;
  link::LinkConfig link;
  SdrSection sdr;
  GevSection gev;
  DatasetSection dataset;
  ml::CNNArch arch = ml::CNNArch::desk();
  ml::TrainConfig train;
  PruneSection prune;
  AllocateSection allocate;

  void validate() const;  // throws ConfigError
};

// Parses and validates a JSON config. Unknown keys, type mismatches and
// missing required fields throw ConfigError with "<source>:<line>: <path>".
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

// Applies PADIST_SEED, PADIST_THREADS and PADIST_OUT. getenv is injectable
// for tests.
inline constexpr const char* kEnvPrefix = "PADIST_";
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
void apply_env_overrides(ExperimentConfig& cfg, const EnvLookup& env);
std::optional<std::string> system_env(const std::string& name);

// Canonical JSON with every default filled in. threads and out are left out
// so the hash only covers what determines the outputs.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

// Dotted key path -> 1-based line of the key in a JSON text.
class LineIndex {
 public:
  explicit LineIndex(std::string_view text);
  int line_of(const std::string& path) const;  // 0 when unknown
  // First repeated key path, empty when keys are unique.
  const std::string& duplicate_key() const { return duplicate_; }

 private:
  std::map<std::string, int> lines_;
  std::string duplicate_;
};

std::string hex64(uint64_t v);

}  // namespace padist::harness
