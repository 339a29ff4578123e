#include "commands.hpp"

#include "rbmscale/error.hpp"
#include "rbmscale/format.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"gen-data", "sample sigma^z measurements of the TFIM ground state"},
    {"train", "train an RBM until the energy criterion passes"},
    {"estimate", "estimate the energy of a saved model and report the ROE"},
    {"sweep-nh", "minimal hidden units over a grid of N and h/J"},
    {"sweep-m", "minimal training-set size over a grid of N"},
    {"prune", "iterative magnitude pruning of a saved model"},
    {"spectrum", "sorted weight magnitudes of a saved model"},
    {"symmetry", "bias ratios and Z2 check of a saved model"},
    {"fit", "straight-line fits to a minimal-N_h table"},
};

}  // namespace

int main(int argc, char** argv) {
  using rbmscale::cli::ExitCode;

  CLI::App app{"RBM reconstruction of transverse-field Ising ground states"};
  app.require_subcommand(1);

  std::string config_file;
  std::string out_dir = "out";
  std::vector<std::string> assignments;
  std::string data_file;
  std::string model_file;
  std::string input_file;
  std::uint64_t seed = 0;
  int workers = 0;

  app.add_option("--config", config_file, "key = value settings file (a manifest.txt also works)");
  auto* seed_opt = app.add_option("--seed", seed, "base seed");
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  auto* workers_opt = app.add_option("--workers", workers, "parallel grid points")->check(CLI::PositiveNumber);
  app.add_option("--set", assignments, "override a setting, key=value (repeatable)");
  app.add_option("--data", data_file, "dataset file");
  app.add_option("--model", model_file, "model checkpoint");
  app.add_option("--input", input_file, "input table (fit)");

  app.fallthrough();  // global flags may follow the subcommand
  for (const auto& [name, help] : kCommands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ExitCode::kOk : ExitCode::kInvalidConfig;
  }

  try {
    rbmscale::KeyValueConfig cfg;
    if (!config_file.empty()) cfg = rbmscale::KeyValueConfig::load(config_file);
    if (*seed_opt) cfg.set("seed", std::to_string(seed));
    if (*workers_opt) cfg.set("workers", std::to_string(workers));
    if (!data_file.empty()) cfg.set("data_file", data_file);
    if (!model_file.empty()) cfg.set("model_file", model_file);
    if (!input_file.empty()) cfg.set("input_file", input_file);
    for (const auto& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw rbmscale::ConfigError("--set expects key=value, got '" + a + "'");
      cfg.set(rbmscale::trim(a.substr(0, eq)), rbmscale::trim(a.substr(eq + 1)));
    }

    rbmscale::cli::Invocation inv;
    inv.command = app.get_subcommands().front()->get_name();
    inv.settings = rbmscale::settings_from_config(cfg);
    inv.out_dir = out_dir;
    return rbmscale::cli::run_command(inv);
  } catch (const rbmscale::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ExitCode::kInvalidConfig;
  } catch (const rbmscale::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return ExitCode::kIoFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCode::kFailure;
  }
}
