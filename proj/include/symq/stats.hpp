#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "symq/engine.hpp"
#include "symq/rng.hpp"

namespace symq::stats {

/// Right-continuous empirical CDF.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> samples);
  double operator()(double x) const;
  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t df = 0;       // chi-square only
  bool degenerate = false;  // too little data to test; never rejects
  bool reject01 = false;
  bool reject05 = false;
};

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// sup |F_a - F_b| with the asymptotic p-value at n = n1 n2 / (n1 + n2).
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// sup |F_n - F| against a continuous CDF; ties in the sample are handled
/// exactly (both one-sided gaps are taken at each jump).
TestResult ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf);

/// Two-sample chi-square homogeneity test on counts by k. Cells are pooled
/// from the largest k downward until both expected counts reach 5.
TestResult chi_square_pmf(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

/// Upper tail of chi-square with df degrees of freedom.
double chi_square_survival(double x, std::size_t df);

struct RatioEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// sum y / sum len with a delete-one jackknife 95% interval. Needs >= 30 pairs.
RatioEstimate ratio_ci(std::span<const double> y, std::span<const double> len);

/// sum f / sum cycle_length with a jackknife 95% interval. Needs >= 30 cycles.
RatioEstimate regenerative_ci(std::span<const CycleStats> cycles,
                              const std::function<double(const CycleStats&)>& f);

struct TailPoint {
  double x;
  double p;  // P(max_q > x)
  double lower;
  double upper;
  double log10_x;  // NaN when x <= 0
  double log10_p;  // NaN when p == 0
};

/// Busy-cycle maximum tail with Wilson 95% intervals.
std::vector<TailPoint> tail_curve(std::span<const CycleStats> cycles,
                                  std::span<const double> x_grid);

/// Time-average pmf of Q over whole cycles: sum_i T_i(k) / sum_i L_i.
std::vector<double> time_average_pmf(std::span<const CycleStats> cycles);

/// Draws from a pmf by inverse CDF.
std::vector<std::size_t> sample_pmf(std::span<const double> pmf, std::size_t n, Rng& rng);

std::vector<std::uint64_t> counts(std::span<const std::size_t> values);

double mean(std::span<const double> x);
double pearson_correlation(std::span<const double> x, std::span<const double> y);
double mean_abs_deviation(std::span<const double> x, std::span<const double> y);

}  // namespace symq::stats
