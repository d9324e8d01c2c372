#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "symq/discipline.hpp"
#include "symq/rbm.hpp"
#include "symq/service_dist.hpp"

namespace symq::cli {

/// Schema or semantic problem in a config file. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  stationary,
  insensitivity,
  transient_marginal,
  diffusion_scale,
  heavy_tail_scale,
  collapse,
  rbm_compare,
  cycle_tails,
  rbm_selftest,
};

std::string to_string(ExperimentKind k);

struct ScalingSpec {
  std::vector<double> r_list;
  double beta = 1.0;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::stationary;
  nlohmann::ordered_json raw;  // as read, with the effective seed filled in

  std::vector<Discipline> disciplines;
  std::vector<std::string> discipline_labels;
  std::vector<ServiceDistribution> services;
  std::vector<std::string> service_labels;

  std::optional<double> lambda;
  std::optional<ScalingSpec> scaling;
  std::optional<rbm::RbmParams> rbm;

  std::string timescale = "diffusion";
  double t = 1.0;
  std::vector<double> times;  // heavy-tail-scale two-time pair
  double horizon = 2.0;       // rescaled T
  double step = 0.01;
  std::size_t replications = 10000;
  std::size_t path_replications = 5;
  std::size_t cycles = 100000;
  std::size_t samples = 10000;
  std::size_t k_max = 10;
  int substeps = 100;
  std::string reflection = "bridge";
  std::vector<double> x_grid;
  bool control = true;
  bool event_log = false;

  std::uint64_t seed = 0;
  std::string output = "out";
};

Discipline parse_discipline(const nlohmann::ordered_json& j, const std::string& where);
ServiceDistribution parse_service(const nlohmann::ordered_json& j, const std::string& where);

/// Builds and checks a config. seed_override stands in for a missing "seed".
ExperimentConfig parse_config(const nlohmann::ordered_json& j,
                              std::optional<std::uint64_t> seed_override = std::nullopt);

/// Reads and parses; JSON syntax errors report line and column.
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

struct ConfigReport {
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

/// Full schema check plus discipline validation, without running anything.
ConfigReport validate_config(const std::filesystem::path& path);

}  // namespace symq::cli
