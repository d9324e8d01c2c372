#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "symq/engine.hpp"
#include "symq/stats.hpp"

namespace symq::output {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest round-trip decimal; "nan" / "inf" for non-finite values.
std::string num(double x);
std::string num(std::uint64_t x);

/// CSV file whose first lines are '#' comments carrying the version and the
/// full config.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const nlohmann::ordered_json& config,
            const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
};

/// {"stat":..., "p":..., "reject01":..., "reject05":...}
nlohmann::ordered_json to_json(const stats::TestResult& r);

/// JSON file as {"meta": {version, config}, ...body}.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& config,
                const nlohmann::ordered_json& body);

/// time,event,position,queue_length with event A or D.
void write_event_log(const std::filesystem::path& path, const nlohmann::ordered_json& config,
                     const std::vector<Event>& events);

}  // namespace symq::output
