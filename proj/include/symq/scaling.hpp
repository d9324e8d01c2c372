#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symq/discipline.hpp"
#include "symq/engine.hpp"
#include "symq/service_dist.hpp"
#include "symq/stats.hpp"

namespace symq::scaling {

/// Heavy-traffic sequence member: lambda_r = (1 - beta/r)/m so that
/// r (1 - lambda_r m) = beta.
struct ScalingParams {
  double r = 1.0;
  double beta = 0.0;
  double m = 1.0;
  double lambda_r = 0.0;
  bool critical = false;       // beta <= 0: rho_r >= 1
  std::optional<double> c_r;   // heavy-tail time constant

  double rho() const { return lambda_r * m; }
};

double lambda_r(double r, double beta, double m);

/// With with_cr, also solves c_r (requires a Pareto kind with alpha in (1,2)).
ScalingParams make_params(double r, double beta, const ServiceDistribution& sd,
                          bool with_cr = false);

enum class TimeScale {
  diffusion,   // t -> r^2 t
  heavy_tail,  // t -> c_r t
};

double time_factor(TimeScale scale, const ScalingParams& p);

/// Raw-time grid k * step * factor for k = 0..round(T/step).
std::vector<double> raw_grid(double T, double step, double factor);

struct ScaledPath {
  std::vector<double> t;
  std::vector<double> value;
};

/// (t_k / time_factor, Q(t_k) / space_factor) for grid points up to T in
/// rescaled time. Throws if the path's grid stops short of time_factor * T.
ScaledPath rescale(const SamplePath& path, double time_factor, double space_factor, double T);
ScaledPath diffusion_scale(const SamplePath& path, double r, double T);
ScaledPath heavy_tail_scale(const SamplePath& path, double r, double c_r, double T);

/// Cycles from independent fixed-size batches (each starting empty) run on
/// the replication kernel; identical output for any thread count.
std::vector<CycleStats> regenerative_cycles(const Discipline& d, const ServiceDistribution& sd,
                                            double lambda, std::size_t n_cycles,
                                            std::uint64_t seed, std::uint64_t stream,
                                            int threads = 0);

struct PairTest {
  std::size_t a;
  std::size_t b;
  stats::TestResult test;
};

std::vector<PairTest> pairwise_chi_square(std::span<const std::vector<std::uint64_t>> counts);

struct MarginalResult {
  double time_factor = 0.0;
  std::vector<std::vector<std::uint64_t>> counts;  // per discipline, by queue length k
  std::vector<PairTest> pairs;
  bool insufficient_data = false;  // some pair was degenerate
};

/// Empirical law of Q_hat(t) per discipline from independent runs started
/// empty; disciplines never share random streams.
MarginalResult transient_marginal_experiment(std::span<const Discipline> disciplines,
                                             const ServiceDistribution& sd,
                                             const ScalingParams& params, TimeScale scale,
                                             double t, std::size_t replications,
                                             std::uint64_t seed, int threads = 0);

/// Stationary law of Q from the regenerative method. Cycles are reduced as
/// they close, so memory grows only with n_cycles * k_max.
struct StationaryEstimate {
  double rho = 0.0;
  std::size_t n_cycles = 0;
  std::vector<double> pmf;                 // time-average pmf
  std::vector<stats::RatioEstimate> p_ge;  // p_ge[k-1] estimates P(Q >= k), k <= k_max
  std::vector<std::size_t> samples;        // iid draws from pmf
};

StationaryEstimate stationary_estimate(const Discipline& d, const ServiceDistribution& sd,
                                       double lambda, std::size_t n_cycles,
                                       std::size_t n_samples, std::size_t k_max,
                                       std::uint64_t seed, std::uint64_t stream,
                                       int threads = 0);

/// sup_x |P((1-rho) G <= x) - (1 - e^{-x})| for G geometric with P(G >= k) = rho^k,
/// scanning the jump points. Also reports the jump index where it is attained.
struct GeometricKs {
  double distance;
  std::size_t argmax_level;
};
GeometricKs scaled_geometric_ks_distance(double rho);

struct StationaryLimitPoint {
  ScalingParams params;
  std::vector<double> scaled_samples;  // (1 - rho_r) Q
  stats::TestResult ks_exp1;
  GeometricKs oracle;
  double ecdf_se = 0.0;  // regenerative s.e. of P(Q <= argmax_level)
  std::vector<stats::RatioEstimate> p_ge;
};

std::vector<StationaryLimitPoint> stationary_limit_experiment(
    const Discipline& d, const ServiceDistribution& sd, std::span<const double> r_list,
    double beta, std::size_t n_cycles, std::size_t n_samples, std::uint64_t seed,
    int threads = 0);

struct CollapseResult {
  std::vector<double> q_hat;
  std::vector<double> w_scaled;  // W_hat(t) * 2m / E[S^2]
  double correlation = 0.0;
  double mean_abs_deviation = 0.0;
};

CollapseResult collapse_check(const Discipline& d, const ServiceDistribution& sd,
                              const ScalingParams& params, double t, std::size_t replications,
                              std::uint64_t seed, int threads = 0);

/// Q_hat at t1 < t2 from the same run.
struct TwoTimeSamples {
  std::vector<double> q1;
  std::vector<double> q2;
};

TwoTimeSamples two_time_samples(const Discipline& d, const ServiceDistribution& sd,
                                const ScalingParams& params, TimeScale scale, double t1,
                                double t2, std::size_t replications, std::uint64_t seed,
                                std::uint64_t stream, int threads = 0);

/// Full rescaled paths on the grid 0..T (step) for a few replications.
std::vector<ScaledPath> scaled_paths(const Discipline& d, const ServiceDistribution& sd,
                                     const ScalingParams& params, TimeScale scale, double T,
                                     double step, std::size_t replications, std::uint64_t seed,
                                     std::uint64_t stream, int threads = 0);

}  // namespace symq::scaling
