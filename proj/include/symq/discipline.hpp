#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace symq {

class InvalidDiscipline : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DisciplineKind { ps, lcfs, table };

/// How a table discipline answers for n beyond its last row.
enum class ExtensionRule {
  repeat_last_row,  // g[n_max] padded with zeros, renormalized
  uniform,          // 1/n, i.e. PS
};

struct Violation {
  std::size_t n;
  std::size_t i;  // 0 when the whole row is at fault
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// A symmetric service discipline: with n customers present, position i is
/// served at rate gamma(n, i), and an arrival that finds n - 1 customers takes
/// position i with probability gamma(n, i). Positions are 1-indexed.
///
/// Immutable after construction; share freely across threads.
class Discipline {
 public:
  static Discipline ps();
  static Discipline lcfs();
  /// rows[n-1] holds the n weights of row n. Rows must have the right length
  /// (throws otherwise); bad weights are kept and surface through rates() and
  /// validate().
  static Discipline table(std::vector<std::vector<double>> rows,
                          ExtensionRule extension = ExtensionRule::repeat_last_row,
                          bool normalize = true);

  DisciplineKind kind() const { return kind_; }
  ExtensionRule extension() const { return extension_; }
  std::size_t table_rows() const { return raw_.size(); }
  std::string name() const;

  /// gamma(n, 1..n). Throws InvalidDiscipline for a bad table row.
  std::vector<double> rates(std::size_t n) const;
  /// Allocation-free variant for the event loop; resizes out to n.
  void rates_into(std::size_t n, std::vector<double>& out) const;

  /// Inverse-CDF walk over rates(n_before + 1); u in [0, 1). Returns 1..n_before+1.
  std::size_t insertion_position(std::size_t n_before, double u) const;

  ValidationReport validate(std::size_t n_check) const;

 private:
  Discipline() = default;

  // Row used for n (n > table_rows() follows the extension rule).
  const std::vector<double>& table_row(std::size_t n) const;

  DisciplineKind kind_ = DisciplineKind::ps;
  ExtensionRule extension_ = ExtensionRule::repeat_last_row;
  bool normalize_ = true;
  std::vector<std::vector<double>> raw_;
  std::vector<std::vector<double>> normalized_;  // empty row when raw row is invalid
  std::vector<std::string> row_error_;
};

}  // namespace symq
