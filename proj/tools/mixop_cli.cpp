// Command-line front end: run / validate experiment configs, list catalogues.
#include "mixop/errors.hpp"
#include "mixop/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <iostream>

namespace {

enum ExitCode { kPass = 0, kVerdictFailure = 1, kUsageError = 2, kNumericFailure = 3 };

// Worker count comes from the environment so that it never enters the
// config (and therefore never changes the outputs).
unsigned workers_from_env() {
  const char* v = std::getenv("MIXOP_WORKERS");
  if (!v) return 0;
  try {
    return static_cast<unsigned>(std::stoul(v));
  } catch (const std::exception&) {
    return 0;
  }
}

void print_catalogue(const std::vector<mixop::Catalogue>& list) {
  for (const auto& c : list) {
    std::cout << std::left << std::setw(22) << c.name << std::setw(26) << c.parameters << c.description << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixop: Monte Carlo and grid solvers for mixed local-nonlocal operators"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run an experiment config and write summary.json + CSV");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  run->add_flag("--quiet", quiet, "suppress progress output");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a config against the schema without running it");
  validate->add_option("config", validate_path, "experiment config (JSON)")->required();

  auto* kernels = app.add_subcommand("list-kernels", "list kernel families and parameters");
  auto* domains = app.add_subcommand("list-domains", "list domain shapes and parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsageError;
  }

  try {
    if (*kernels) {
      print_catalogue(mixop::kernel_catalogue());
      return kPass;
    }
    if (*domains) {
      print_catalogue(mixop::domain_catalogue());
      return kPass;
    }
    if (*validate) {
      mixop::validate_config(mixop::load_config(validate_path));
      std::cout << validate_path << ": ok\n";
      return kPass;
    }
    mixop::RunOptions options;
    options.out_dir = out_dir;
    options.quiet = quiet;
    options.workers = workers_from_env();
    if (*seed_opt) options.seed = seed;
    const auto outcome = mixop::run_experiment(mixop::load_config(config_path), options, std::cout);
    if (!quiet) {
      std::cout << (outcome.all_pass ? "all verdicts pass" : "verdict failure") << "; wrote "
                << outcome.files.size() << " files to " << out_dir << '\n';
    }
    return outcome.all_pass ? kPass : kVerdictFailure;
  } catch (const mixop::ArgumentError& e) {  // includes hypothesis violations
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const mixop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const mixop::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
}
