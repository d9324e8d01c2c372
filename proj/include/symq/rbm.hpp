#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "symq/rng.hpp"
#include "symq/service_dist.hpp"

namespace symq::rbm {

/// Reflected Brownian motion started at 0 with drift mu and variance sigma2.
struct RbmParams {
  double mu = 0.0;
  double sigma2 = 1.0;
};

/// P(R(t) <= x). Requires sigma2 > 0 and t > 0; 0 for x < 0.
double transition_cdf(double x, double t, const RbmParams& p);

/// P(R(inf) <= x) = 1 - exp(2 mu x / sigma2); requires mu < 0.
double stationary_cdf(double x, const RbmParams& p);

/// sigma2 / (2 |mu|); requires mu < 0.
double stationary_mean(const RbmParams& p);

enum class Reflection {
  // Exact: the running minimum inside each substep is drawn from the
  // Brownian-bridge minimum law given the endpoints.
  bridge,
  // Minimum over substep endpoints only; biased low by O(sqrt(substep)).
  euler,
};

struct PathOptions {
  int substeps = 100;  // per grid interval
  Reflection reflection = Reflection::bridge;
};

/// R(t) = X(t) - min(0, inf_{s<=t} X(s)) at the grid times (increasing, > 0).
std::vector<double> simulate_path(const RbmParams& p, std::span<const double> grid, Rng& rng,
                                  const PathOptions& options = {});

/// Independent draws of R(t), one path each, on the OpenMP replication kernel.
std::vector<double> marginal_samples(const RbmParams& p, double t, std::size_t n_paths,
                                     std::uint64_t seed, const PathOptions& options = {},
                                     int threads = 0);

/// Reference RBM for the diffusion-scaled queue length.
///
/// The scaled workload has drift -beta and variance E[S^2]/m; state-space
/// collapse maps queue length to workload times 2m/E[S^2]. Hence
///   mu = -2 m beta / E[S^2],   sigma2 = 4 m / E[S^2],
/// whose stationary mean sigma2 / (2|mu|) = 1/beta matches the unit-mean
/// exponential limit of (1 - rho) Q(inf).
RbmParams params_from_queue(double m, double s2, double beta);
RbmParams params_from_queue(const ServiceDistribution& sd, double beta);

}  // namespace symq::rbm
