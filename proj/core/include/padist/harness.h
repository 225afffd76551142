#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "padist/config.h"

namespace padist::harness {

inline constexpr const char* kVersion = "0.1.0";

// Files of one command run. Every file lands directly inside root; names
// with path separators are rejected. Writes go through a temporary file and
// a rename so a failed run leaves no half-written outputs.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(const std::string& name) const;
  void ensure() const;
  void write(const std::string& name, const std::string& bytes);
  // Registers a file written by another API (e.g. save_model).
  void record(const std::string& name);
  const std::map<std::string, std::string>& outputs() const { return outputs_; }

 private:
  std::filesystem::path root_;
  std::map<std::string, std::string> outputs_;  // name -> content hash
};

std::string read_file(const std::filesystem::path& path);
std::string file_hash(const std::filesystem::path& path);

// Explicit inputs; empty paths default to files inside the output directory.
struct CommandInputs {
  std::string table;    // fit-gev, autocorr
  std::string dataset;  // train, eval, prune
  std::string model;    // eval, prune, allocate
  std::optional<double> gamma_db;
  bool resume = false;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate-sdr", "fit-gev",  "autocorr",
                                              "dataset",      "train",    "eval",
                                              "prune",        "allocate", "report"};
  return names;
}

// Runs one command and writes <command>.manifest.json. Inputs are checked
// before the output directory is created. Returns the manifest.
nlohmann::json run_command(const std::string& command, const ExperimentConfig& cfg,
                           const CommandInputs& inputs = {});

}  // namespace padist::harness
