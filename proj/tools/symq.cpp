#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "symq/config.hpp"
#include "symq/discipline.hpp"
#include "symq/runner.hpp"
#include "symq/service_dist.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kConfig = 2;

int env_threads() {
  if (const char* s = std::getenv("SYMQ_THREADS")) {
    try {
      return std::stoi(s);
    } catch (const std::exception&) {
      std::cerr << "symq: ignoring SYMQ_THREADS=" << s << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetric M/G/1 queue simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 0;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Seed; overrides the config");
  run->add_option("--out", out_dir, "Output directory; overrides the config");
  run->add_option("--threads", threads, "Worker threads (default: SYMQ_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("config", config_path, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (validate->parsed()) {
    const auto report = symq::cli::validate_config(config_path);
    if (report.ok()) {
      std::cout << "ok\n";
      return kOk;
    }
    for (const auto& p : report.problems) std::cerr << "symq: " << p << "\n";
    return kConfig;
  }

  symq::cli::ExperimentConfig config;
  try {
    config = symq::cli::load_config(config_path, seed);
  } catch (const std::exception& e) {
    std::cerr << "symq: " << e.what() << "\n";
    return kConfig;
  }
  if (threads == 0) threads = env_threads();
  const std::string dir = out_dir.empty() ? config.output : out_dir;

  try {
    symq::cli::run_experiment(config, dir, threads);
  } catch (const symq::cli::ConfigError& e) {
    std::cerr << "symq: " << e.what() << "\n";
    return kConfig;
  } catch (const symq::UnsupportedRegime& e) {
    std::cerr << "symq: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "symq: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
