#include "symq/rbm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "symq/replicate.hpp"

namespace symq::rbm {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// log Phi(z), accurate far into the lower tail.
double log_normal_cdf(double z) {
  if (z > -30.0) return std::log(normal_cdf(z));
  // Mills ratio asymptotics: Phi(z) ~ phi(z)/|z| (1 - 1/z^2 + 3/z^4)
  const double z2 = z * z;
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

}  // namespace

double transition_cdf(double x, double t, const RbmParams& p) {
  if (!(t > 0.0)) throw std::invalid_argument("transition_cdf: t must be positive");
  if (!(p.sigma2 > 0.0)) throw std::invalid_argument("transition_cdf: sigma2 must be positive");
  if (x < 0.0) return 0.0;
  const double s = std::sqrt(p.sigma2 * t);
  const double first = normal_cdf((x - p.mu * t) / s);
  const double log_second = 2.0 * p.mu * x / p.sigma2 + log_normal_cdf((-x - p.mu * t) / s);
  return std::clamp(first - std::exp(log_second), 0.0, 1.0);
}

double stationary_cdf(double x, const RbmParams& p) {
  if (!(p.mu < 0.0)) throw std::invalid_argument("stationary law needs mu < 0");
  if (x < 0.0) return 0.0;
  return -std::expm1(2.0 * p.mu * x / p.sigma2);
}

double stationary_mean(const RbmParams& p) {
  if (!(p.mu < 0.0)) throw std::invalid_argument("stationary law needs mu < 0");
  return p.sigma2 / (2.0 * std::abs(p.mu));
}

std::vector<double> simulate_path(const RbmParams& p, std::span<const double> grid, Rng& rng,
                                  const PathOptions& options) {
  if (options.substeps < 1) throw std::invalid_argument("simulate_path: substeps must be >= 1");
  if (p.sigma2 < 0.0) throw std::invalid_argument("simulate_path: sigma2 must be >= 0");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > (k == 0 ? 0.0 : grid[k - 1]))) {
      throw std::invalid_argument("simulate_path: grid must be increasing and start after 0");
    }
  }
  const double sigma = std::sqrt(p.sigma2);
  std::vector<double> out;
  out.reserve(grid.size());

  double t = 0.0, x = 0.0, running_min = 0.0;
  for (double target : grid) {
    const double h = (target - t) / options.substeps;
    const double sd = sigma * std::sqrt(h);
    for (int j = 0; j < options.substeps; ++j) {
      const double next = x + p.mu * h + sd * rng.normal();
      if (options.reflection == Reflection::bridge) {
        const double gap = next - x;
        const double m =
            0.5 * (x + next - std::sqrt(gap * gap - 2.0 * p.sigma2 * h * std::log(rng.uniform_pos())));
        running_min = std::min(running_min, m);
      } else {
        running_min = std::min(running_min, next);
      }
      x = next;
    }
    t = target;
    out.push_back(x - running_min);
  }
  return out;
}

std::vector<double> marginal_samples(const RbmParams& p, double t, std::size_t n_paths,
                                     std::uint64_t seed, const PathOptions& options, int threads) {
  const double grid[1] = {t};
  return parallel::replicate<double>(
      n_paths, seed, 0,
      [&](std::size_t, Rng& rng) { return simulate_path(p, grid, rng, options).front(); }, threads);
}

RbmParams params_from_queue(double m, double s2, double beta) {
  if (!std::isfinite(s2)) throw UnsupportedRegime("RBM parameters need a finite second moment");
  if (!(m > 0.0) || !(s2 > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("params_from_queue: m, s2 and beta must be positive");
  }
  return {-2.0 * m * beta / s2, 4.0 * m / s2};
}

RbmParams params_from_queue(const ServiceDistribution& sd, double beta) {
  const auto mo = sd.moments();
  if (!mo.second.is_finite()) {
    throw UnsupportedRegime(sd.name() + ": RBM parameters need a finite second moment");
  }
  return params_from_queue(mo.mean, mo.second.value(), beta);
}

}  // namespace symq::rbm
