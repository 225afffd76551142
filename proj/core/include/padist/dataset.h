#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "padist/link.h"
#include "padist/scenario.h"

namespace padist::ml {

enum class Split : uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct Record {
  std::vector<double> features;  // row-major K x K feature matrix
  double label_db = 0.0;         // measured scheduled-UE SDR
  double gamma_db = 0.0;
  int ue_id = 0;
  Split split = Split::kTrain;
};

struct Dataset {
  int input_size = 0;
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
  std::vector<std::size_t> indices(Split s) const;
  void validate() const;
};

inline constexpr double kLabelGuardDb = 1.0;

struct DatasetSpec {
  channel::Scenario scenario;
  link::LinkConfig link;  // gamma_avg is replaced by each IBO
  std::vector<double> ibo_db;
  Split split = Split::kTrain;
  uint64_t seed = 1;
  int threads = 1;
};

struct BuildReport {
  std::size_t attempted = 0;
  std::vector<std::string> skipped;  // one message per dropped record
};

// Records are ordered UE-major, then by IBO. Symbol streams come from
// derive_seed(seed, "link", ue); channels from channel::ue_channel.
Dataset build_dataset(const DatasetSpec& spec, BuildReport* report = nullptr);

// Tags a val_fraction share of the non-test records as validation, chosen by
// a seeded shuffle.
void split_train_val(Dataset& ds, double val_fraction, uint64_t seed);

// Deterministic Fisher-Yates permutation of [0, n).
std::vector<std::size_t> permutation(std::size_t n, uint64_t seed);

// CSV: "# padist-dataset v1 k=<K>", header ue_id,gamma_db,label_db,split,f0..
void write_dataset_csv(std::ostream& os, const Dataset& ds);
Dataset read_dataset_csv(std::istream& is);
void write_dataset_binary(std::ostream& os, const Dataset& ds);
Dataset read_dataset_binary(std::istream& is);

}  // namespace padist::ml
