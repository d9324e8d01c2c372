#include "symq/output.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace symq::output {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string num(std::uint64_t x) { return std::to_string(x); }

CsvWriter::CsvWriter(const std::filesystem::path& path, const nlohmann::ordered_json& config,
                     const std::vector<std::string>& columns)
    : out_(path), width_(columns.size()) {
  if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
  out_ << "# symq " << kVersion << "\n";
  out_ << "# config: " << config.dump() << "\n";
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

nlohmann::ordered_json to_json(const stats::TestResult& r) {
  nlohmann::ordered_json j;
  j["stat"] = r.statistic;
  j["p"] = r.p_value;
  j["reject01"] = r.reject01;
  j["reject05"] = r.reject05;
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& config,
                const nlohmann::ordered_json& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  nlohmann::ordered_json j;
  j["meta"] = {{"version", kVersion}, {"config", config}};
  for (const auto& [k, v] : body.items()) j[k] = v;
  out << j.dump(2) << "\n";
}

void write_event_log(const std::filesystem::path& path, const nlohmann::ordered_json& config,
                     const std::vector<Event>& events) {
  CsvWriter w(path, config, {"time", "event", "position", "queue_length"});
  for (const auto& e : events) {
    w.row({num(e.time), e.kind == EventKind::arrival ? "A" : "D", num(std::uint64_t{e.position}),
           num(std::uint64_t{e.queue_length})});
  }
}

}  // namespace symq::output
