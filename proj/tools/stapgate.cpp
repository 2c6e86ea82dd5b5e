#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stapgate/config.hpp"
#include "stapgate/experiments.hpp"
#include "stapgate/schedule.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kAccuracyError = 2 };

struct Options {
  std::string config;
  std::string out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
};

// Experiments each subcommand runs; sweep uses experiment.run from the config.
const std::map<std::string, std::vector<std::string>>& subcommand_runs() {
  static const std::map<std::string, std::vector<std::string>> runs{
      {"gate", {"gate_table"}},
      {"compare", {"fig7_adiabatic_zeno"}},
      {"decoherence", {"fig8_decoherence"}},
      {"robustness", {"fig9_robustness"}},
      {"cluster", {"cluster"}},
      {"pulses", {"fig5_pulses_populations"}},
  };
  return runs;
}

int run(const std::string& command, const Options& opts) {
  stapgate::RunConfig cfg;
  try {
    cfg = stapgate::load_config(opts.config);
  } catch (const stapgate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  if (opts.workers) cfg.experiment.workers = std::max(1, *opts.workers);
  if (opts.seed) cfg.experiment.seed = *opts.seed;
  if (command != "sweep") cfg.experiment.run = subcommand_runs().at(command);

  const std::filesystem::path out(opts.out);
  try {
    if (command == "pulses") {
      std::filesystem::create_directories(out);
      std::ofstream os(out / "schedule.csv", std::ios::binary);
      stapgate::write_schedule_csv(os, stapgate::build_schedule(cfg),
                                   cfg.experiment.record_points);
    }
    const auto summary = stapgate::run_config(cfg, out, command);
    for (const auto& rec : summary.experiments) {
      std::cout << rec.id << ": " << rec.rows << " rows, " << rec.errors
                << " errors, " << rec.seconds << " s\n";
    }
    std::cout << "manifest: " << summary.manifest.string() << "\n";
    if (summary.total_errors() > 0) {
      std::cerr << summary.total_errors() << " grid points failed\n";
      return kAccuracyError;
    }
  } catch (const stapgate::AccuracyError& e) {
    std::cerr << "accuracy failure: " << e.what() << "\n";
    return kAccuracyError;
  } catch (const stapgate::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-atom STAP gate simulator"};
  app.require_subcommand(1);

  Options opts;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"gate", "Extract the l- and r-stage gate matrices"},
      {"sweep", "Run the experiments listed under experiment.run"},
      {"compare", "Compare stap, adiabatic and Zeno schedules"},
      {"decoherence", "Fidelity versus decay rates"},
      {"robustness", "Fidelity versus parameter deviations"},
      {"cluster", "Cluster-state protocol"},
      {"pulses", "Pulse envelopes and population dynamics"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "YAML config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "Output directory")->required();
    sub->add_option("--workers", opts.workers, "Worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", opts.seed, "Seed recorded in the manifest");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}
