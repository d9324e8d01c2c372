#include "symq/discipline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace symq {

namespace {

constexpr double kSumTolerance = 1e-12;

}  // namespace

Discipline Discipline::ps() {
  Discipline d;
  d.kind_ = DisciplineKind::ps;
  return d;
}

Discipline Discipline::lcfs() {
  Discipline d;
  d.kind_ = DisciplineKind::lcfs;
  return d;
}

Discipline Discipline::table(std::vector<std::vector<double>> rows, ExtensionRule extension,
                             bool normalize) {
  if (rows.empty()) throw InvalidDiscipline("table discipline needs at least one row");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != k + 1) {
      throw InvalidDiscipline("table row " + std::to_string(k + 1) + " has " +
                              std::to_string(rows[k].size()) + " entries, expected " +
                              std::to_string(k + 1));
    }
  }

  Discipline d;
  d.kind_ = DisciplineKind::table;
  d.extension_ = extension;
  d.normalize_ = normalize;
  d.raw_ = std::move(rows);
  d.normalized_.resize(d.raw_.size());
  d.row_error_.resize(d.raw_.size());

  for (std::size_t k = 0; k < d.raw_.size(); ++k) {
    const auto& row = d.raw_[k];
    const std::size_t n = k + 1;
    std::string& err = d.row_error_[k];
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!(row[i] >= 0.0) || !std::isfinite(row[i])) {
        err = "negative or non-finite weight at (n=" + std::to_string(n) +
              ", i=" + std::to_string(i + 1) + ")";
        break;
      }
    }
    if (!err.empty()) continue;
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (sum <= 0.0) {
      err = "row n=" + std::to_string(n) + " has no positive weight";
      continue;
    }
    if (std::abs(sum - 1.0) > kSumTolerance && !normalize) {
      err = "row n=" + std::to_string(n) + " sums to " + std::to_string(sum) +
            " and normalization is disabled";
      continue;
    }
    auto& out = d.normalized_[k];
    out.resize(row.size());
    std::transform(row.begin(), row.end(), out.begin(), [sum](double g) { return g / sum; });
  }
  return d;
}

std::string Discipline::name() const {
  switch (kind_) {
    case DisciplineKind::ps:
      return "ps";
    case DisciplineKind::lcfs:
      return "lcfs";
    case DisciplineKind::table:
      return "table";
  }
  return "unknown";
}

const std::vector<double>& Discipline::table_row(std::size_t n) const {
  const std::size_t k = std::min(n, raw_.size()) - 1;
  if (!row_error_[k].empty()) throw InvalidDiscipline(row_error_[k]);
  return normalized_[k];
}

void Discipline::rates_into(std::size_t n, std::vector<double>& out) const {
  if (n == 0) throw std::invalid_argument("rates: n must be >= 1");
  out.assign(n, 0.0);
  switch (kind_) {
    case DisciplineKind::ps:
      std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
      return;
    case DisciplineKind::lcfs:
      out[0] = 1.0;
      return;
    case DisciplineKind::table:
      if (n > raw_.size() && extension_ == ExtensionRule::uniform) {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
        return;
      }
      const auto& row = table_row(n);
      std::copy(row.begin(), row.end(), out.begin());
      return;
  }
}

std::vector<double> Discipline::rates(std::size_t n) const {
  std::vector<double> out;
  rates_into(n, out);
  return out;
}

std::size_t Discipline::insertion_position(std::size_t n_before, double u) const {
  const std::size_t n = n_before + 1;
  switch (kind_) {
    case DisciplineKind::lcfs:
      return 1;
    case DisciplineKind::ps:
      return std::min(n, static_cast<std::size_t>(u * static_cast<double>(n)) + 1);
    case DisciplineKind::table:
      break;
  }
  if (n > raw_.size() && extension_ == ExtensionRule::uniform) {
    return std::min(n, static_cast<std::size_t>(u * static_cast<double>(n)) + 1);
  }
  const auto& row = table_row(n);
  double cumulative = 0.0;
  std::size_t last_positive = 1;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] <= 0.0) continue;
    cumulative += row[i];
    last_positive = i + 1;
    if (u < cumulative) return i + 1;
  }
  // Rounding left the cumulative sum a hair below 1.
  return last_positive;
}

ValidationReport Discipline::validate(std::size_t n_check) const {
  ValidationReport report;
  std::vector<double> buf;
  for (std::size_t n = 1; n <= n_check; ++n) {
    if (kind_ == DisciplineKind::table && n <= raw_.size()) {
      const auto& row = raw_[n - 1];
      bool bad = false;
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (!(row[i] >= 0.0) || !std::isfinite(row[i])) {
          report.violations.push_back({n, i + 1, "negative weight"});
          bad = true;
        }
      }
      if (bad) continue;
      if (!row_error_[n - 1].empty()) {
        report.violations.push_back({n, 0, row_error_[n - 1]});
        continue;
      }
    }
    try {
      rates_into(n, buf);
    } catch (const InvalidDiscipline&) {
      // Extension of an invalid last row; already reported above.
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (buf[i] < 0.0) report.violations.push_back({n, i + 1, "negative rate"});
    }
    const double sum = std::accumulate(buf.begin(), buf.end(), 0.0);
    if (std::abs(sum - 1.0) > kSumTolerance) {
      report.violations.push_back({n, 0, "rates sum to " + std::to_string(sum)});
    }
  }
  return report;
}

}  // namespace symq
