#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "symq/rng.hpp"

namespace symq {

/// A requested computation needs a regime the configuration does not have
/// (finite variance, heavy tail with alpha in (1,2), stability, ...).
class UnsupportedRegime : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace service {

struct Exponential {
  double mean;
};
struct Deterministic {
  double value;
};
struct HyperExp {
  std::vector<double> probs;
  std::vector<double> means;
};
struct Erlang {
  int k;
  double mean;
};
// Tail (x / x_min)^-alpha above x_min.
struct Pareto {
  double alpha;
  double x_min;
};
// Tail (1 + log(x / x_min)) (x / x_min)^-alpha above x_min.
struct ParetoLog {
  double alpha;
  double x_min;
};

}  // namespace service

/// E[S^2], which is either a number or explicitly infinite.
class SecondMoment {
 public:
  static SecondMoment finite(double v) { return SecondMoment(v, false); }
  static SecondMoment infinite() { return SecondMoment(0.0, true); }

  bool is_finite() const { return !infinite_; }
  /// Throws UnsupportedRegime when infinite.
  double value() const;

 private:
  SecondMoment(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

struct Moments {
  double mean;
  SecondMoment second;
};

struct CrSolution {
  double c_r;
  bool at_boundary;     // x_min already satisfies x F(x) <= 1/r
  double rel_residual;  // |c_r Fbar(c_r) - 1/r| * r
};

/// Service-time law. Immutable; sampling draws from a caller-owned Rng.
class ServiceDistribution {
 public:
  using Variant = std::variant<service::Exponential, service::Deterministic, service::HyperExp,
                               service::Erlang, service::Pareto, service::ParetoLog>;

  static ServiceDistribution exponential(double mean);
  static ServiceDistribution deterministic(double value);
  static ServiceDistribution hyperexp(std::vector<double> probs, std::vector<double> means);
  static ServiceDistribution erlang(int k, double mean);
  static ServiceDistribution pareto(double alpha, double x_min);
  static ServiceDistribution pareto_log(double alpha, double x_min);

  /// Same family rescaled to the given mean.
  ServiceDistribution with_mean(double mean) const;

  const Variant& params() const { return law_; }
  std::string name() const;
  bool heavy_tailed() const;
  /// Tail index for Pareto kinds; throws otherwise.
  double alpha() const;

  double sample(Rng& rng) const;
  /// x with Fbar(x) = u, for u in (0, 1]. Pareto kinds only.
  double inverse_tail(double u) const;

  double mean() const;
  Moments moments() const;
  /// Fbar(x) = P(S > x).
  double tail(double x) const;

  /// Mean of the equilibrium (stationary-excess) law, E[S^2] / (2m).
  double equilibrium_residual_mean() const;

  /// Smallest x >= x_min with x Fbar(x) <= 1/r, by bisection. Requires a
  /// Pareto kind with alpha in (1, 2) and r >= 1.
  CrSolution solve_cr(double r) const;

 private:
  explicit ServiceDistribution(Variant v) : law_(std::move(v)) {}
  Variant law_;
};

}  // namespace symq
