#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "padist/config.h"
#include "padist/error.h"
#include "padist/harness.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

int exit_code(const padist::Error& e) {
  switch (e.error_class()) {
    case padist::ErrorClass::kConfig: return kExitConfig;
    case padist::ErrorClass::kIo: return kExitIo;
    case padist::ErrorClass::kNumeric:
    case padist::ErrorClass::kInvalidArgument: return kExitNumeric;
  }
  return kExitNumeric;
}

struct Options {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::string out;
  padist::harness::CommandInputs inputs;
  std::optional<double> gamma_db;
};

const std::map<std::string, std::string>& descriptions() {
  static const std::map<std::string, std::string> d{
      {"simulate-sdr", "Scheduled and victim SDR tables and SDR maps over the UE grid"},
      {"fit-gev", "Fit a GEV to theory-normalized victim SDRs and run a KS test"},
      {"autocorr", "Spatial autocorrelation and decorrelation distance of SDR maps"},
      {"dataset", "Build the CNN training, validation and held-out-IBO test records"},
      {"train", "Train the SDR regression CNN (--resume continues from checkpoint)"},
      {"eval", "Evaluate a model on every split of a dataset"},
      {"prune", "Magnitude-prune a model, fine-tune it and report the MAPE change"},
      {"allocate", "Per-UE IBO allocation and rate ratio against a fixed-IBO baseline"},
      {"report", "Collect the metrics of every manifest in the output directory"}};
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"padist: PA distortion experiments for massive MIMO OFDM downlinks"};
  app.require_subcommand(1);
  app.footer(
      "Environment overrides (below command-line flags, above the config file):\n"
      "  PADIST_SEED, PADIST_THREADS, PADIST_OUT\n"
      "Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 I/O failure");
  Options opt;
  std::string command;
  for (const auto& name : padist::harness::command_names()) {
    CLI::App* sub = app.add_subcommand(name, descriptions().at(name));
    sub->add_option("--config", opt.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", opt.seed, "Root seed");
    sub->add_option("--threads", opt.threads, "Worker threads, 0 = all cores")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", opt.out, "Output directory");
    if (name == "fit-gev" || name == "autocorr") {
      sub->add_option("--input", opt.inputs.table, "SDR table (default: from --out)");
      sub->add_option("--gamma-db", opt.gamma_db, "Only use rows at this IBO");
    }
    if (name == "train" || name == "eval" || name == "prune") {
      sub->add_option("--dataset", opt.inputs.dataset, "dataset.bin (default: from --out)");
    }
    if (name == "eval" || name == "prune" || name == "allocate") {
      sub->add_option("--model", opt.inputs.model, "model.json (default: from --out)");
    }
    if (name == "train") sub->add_flag("--resume", opt.inputs.resume, "Resume from checkpoint.json");
    sub->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    auto cfg = padist::harness::load_config(opt.config);
    padist::harness::apply_env_overrides(cfg, padist::harness::system_env);
    if (opt.seed) {
      cfg.seed = *opt.seed;
      cfg.train.seed = *opt.seed;
    }
    if (opt.threads) {
      cfg.threads = *opt.threads;
      cfg.train.threads = *opt.threads;
    }
    if (!opt.out.empty()) cfg.out_dir = opt.out;
    opt.inputs.gamma_db = opt.gamma_db;
    const auto manifest = padist::harness::run_command(command, cfg, opt.inputs);
    std::cout << manifest["metrics"].dump(2) << "\n";
    std::cerr << command << ": " << manifest["outputs"].size() << " files in " << cfg.out_dir
              << " (config " << manifest["config_hash"].get<std::string>() << ")\n";
    return kExitOk;
  } catch (const padist::Error& e) {
    std::cerr << "padist " << command << ": error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "padist " << command << ": internal error: " << e.what() << "\n";
    return 1;
  }
}
