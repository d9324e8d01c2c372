#pragma once

#include <filesystem>
#include <vector>

#include "symq/config.hpp"

namespace symq::cli {

struct RunResult {
  std::vector<std::filesystem::path> files;
};

/// Runs one experiment and writes its CSV/JSON outputs under out_dir. Output
/// bytes depend only on the config (seed included), never on `threads`.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                         int threads = 0);

}  // namespace symq::cli
