#include "symq/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "symq/replicate.hpp"

namespace symq::scaling {

namespace {

constexpr std::size_t kCycleBatches = 64;
constexpr std::uint64_t kSamplingStream = std::numeric_limits<std::uint64_t>::max();

}  // namespace

double lambda_r(double r, double beta, double m) {
  if (!(r > 0.0)) throw std::invalid_argument("lambda_r: r must be positive");
  if (!(m > 0.0)) throw std::invalid_argument("lambda_r: m must be positive");
  if (beta > r) throw std::invalid_argument("lambda_r: beta > r gives a negative arrival rate");
  return (1.0 - beta / r) / m;
}

ScalingParams make_params(double r, double beta, const ServiceDistribution& sd, bool with_cr) {
  ScalingParams p;
  p.r = r;
  p.beta = beta;
  p.m = sd.mean();
  p.lambda_r = lambda_r(r, beta, p.m);
  p.critical = beta <= 0.0;
  if (with_cr) p.c_r = sd.solve_cr(r).c_r;
  return p;
}

double time_factor(TimeScale scale, const ScalingParams& p) {
  if (scale == TimeScale::diffusion) return p.r * p.r;
  if (!p.c_r) throw std::invalid_argument("heavy-tail scaling needs c_r");
  return *p.c_r;
}

std::vector<double> raw_grid(double T, double step, double factor) {
  if (!(T > 0.0) || !(step > 0.0) || !(factor > 0.0)) {
    throw std::invalid_argument("raw_grid: T, step and factor must be positive");
  }
  const auto n = static_cast<std::size_t>(std::llround(T / step));
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = static_cast<double>(k) * step * factor;
  return g;
}

ScaledPath rescale(const SamplePath& path, double time_factor, double space_factor, double T) {
  if (!(time_factor > 0.0) || !(space_factor > 0.0)) {
    throw std::invalid_argument("rescale: factors must be positive");
  }
  const double needed = time_factor * T;
  if (path.times.empty() || path.times.back() < needed * (1.0 - 1e-12)) {
    throw std::invalid_argument("rescale: observation grid does not cover the requested horizon");
  }
  ScaledPath out;
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    const double t = path.times[k] / time_factor;
    if (t > T * (1.0 + 1e-12)) break;
    out.t.push_back(t);
    out.value.push_back(static_cast<double>(path.queue_length[k]) / space_factor);
  }
  return out;
}

ScaledPath diffusion_scale(const SamplePath& path, double r, double T) {
  return rescale(path, r * r, r, T);
}

ScaledPath heavy_tail_scale(const SamplePath& path, double r, double c_r, double T) {
  return rescale(path, c_r, r, T);
}

std::vector<CycleStats> regenerative_cycles(const Discipline& d, const ServiceDistribution& sd,
                                            double lambda, std::size_t n_cycles,
                                            std::uint64_t seed, std::uint64_t stream,
                                            int threads) {
  const std::size_t batches = std::min(n_cycles, kCycleBatches);
  const std::size_t base = batches ? n_cycles / batches : 0;
  const std::size_t extra = batches ? n_cycles % batches : 0;
  auto parts = parallel::replicate<std::vector<CycleStats>>(
      batches, seed, stream,
      [&](std::size_t b, Rng& rng) {
        return busy_cycles(d, sd, lambda, base + (b < extra ? 1 : 0), rng);
      },
      threads);
  std::vector<CycleStats> all;
  all.reserve(n_cycles);
  for (auto& part : parts) {
    std::move(part.begin(), part.end(), std::back_inserter(all));
  }
  return all;
}

std::vector<PairTest> pairwise_chi_square(std::span<const std::vector<std::uint64_t>> counts) {
  std::vector<PairTest> out;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    for (std::size_t b = a + 1; b < counts.size(); ++b) {
      out.push_back({a, b, stats::chi_square_pmf(counts[a], counts[b])});
    }
  }
  return out;
}

MarginalResult transient_marginal_experiment(std::span<const Discipline> disciplines,
                                             const ServiceDistribution& sd,
                                             const ScalingParams& params, TimeScale scale,
                                             double t, std::size_t replications,
                                             std::uint64_t seed, int threads) {
  if (!(t > 0.0)) throw std::invalid_argument("transient_marginal_experiment: t must be positive");
  MarginalResult res;
  res.time_factor = time_factor(scale, params);
  const double raw_t = res.time_factor * t;
  const double grid[1] = {raw_t};

  for (std::size_t j = 0; j < disciplines.size(); ++j) {
    const Discipline& d = disciplines[j];
    auto q = parallel::replicate<std::size_t>(
        replications, seed, j + 1,
        [&](std::size_t, Rng& rng) {
          return simulate(d, sd, params.lambda_r, raw_t, grid, rng).queue_length.front();
        },
        threads);
    res.counts.push_back(stats::counts(q));
  }
  res.pairs = pairwise_chi_square(res.counts);
  res.insufficient_data = std::any_of(res.pairs.begin(), res.pairs.end(),
                                      [](const PairTest& p) { return p.test.degenerate; });
  return res;
}

StationaryEstimate stationary_estimate(const Discipline& d, const ServiceDistribution& sd,
                                       double lambda, std::size_t n_cycles,
                                       std::size_t n_samples, std::size_t k_max,
                                       std::uint64_t seed, std::uint64_t stream, int threads) {
  StationaryEstimate est;
  est.rho = lambda * sd.mean();
  if (lambda == 0.0) {
    // Nobody ever arrives.
    est.pmf = {1.0};
    est.p_ge.assign(k_max, stats::RatioEstimate{});
    est.samples.assign(n_samples, 0);
    return est;
  }
  if (!(est.rho < 1.0)) {
    throw UnsupportedRegime("stationary law needs rho < 1; rho = " + std::to_string(est.rho));
  }

  struct Batch {
    std::vector<double> level_time;           // summed over the batch
    std::vector<double> length;               // per cycle
    std::vector<std::vector<double>> at_least;  // [k-1][cycle]
  };
  const std::size_t batches = std::min(n_cycles, kCycleBatches);
  const std::size_t base = batches ? n_cycles / batches : 0;
  const std::size_t extra = batches ? n_cycles % batches : 0;
  auto parts = parallel::replicate<Batch>(
      batches, seed, stream,
      [&](std::size_t b, Rng& rng) {
        Batch out;
        out.at_least.resize(k_max);
        const std::size_t n = base + (b < extra ? 1 : 0);
        out.length.reserve(n);
        for (auto& v : out.at_least) v.reserve(n);
        for_each_cycle(d, sd, lambda, n, rng, [&](CycleStats&& c) {
          if (c.level_time.size() > out.level_time.size()) out.level_time.resize(c.level_time.size(), 0.0);
          for (std::size_t k = 0; k < c.level_time.size(); ++k) out.level_time[k] += c.level_time[k];
          out.length.push_back(c.cycle_length);
          for (std::size_t k = 1; k <= k_max; ++k) out.at_least[k - 1].push_back(c.time_at_least(k));
        });
        return out;
      },
      threads);

  std::vector<double> level, length;
  length.reserve(n_cycles);
  std::vector<std::vector<double>> at_least(k_max);
  for (auto& v : at_least) v.reserve(n_cycles);
  for (auto& part : parts) {
    if (part.level_time.size() > level.size()) level.resize(part.level_time.size(), 0.0);
    for (std::size_t k = 0; k < part.level_time.size(); ++k) level[k] += part.level_time[k];
    length.insert(length.end(), part.length.begin(), part.length.end());
    for (std::size_t k = 0; k < k_max; ++k) {
      at_least[k].insert(at_least[k].end(), part.at_least[k].begin(), part.at_least[k].end());
    }
    part = Batch{};
  }
  est.n_cycles = length.size();
  double total = 0.0;
  for (double v : level) total += v;
  est.pmf.resize(level.size());
  for (std::size_t k = 0; k < level.size(); ++k) est.pmf[k] = level[k] / total;
  for (std::size_t k = 0; k < k_max; ++k) est.p_ge.push_back(stats::ratio_ci(at_least[k], length));

  Rng sampler(seed, {stream, kSamplingStream});
  est.samples = stats::sample_pmf(est.pmf, n_samples, sampler);
  return est;
}

GeometricKs scaled_geometric_ks_distance(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
  const double eps = 1.0 - rho;
  GeometricKs best{0.0, 0};
  double rho_k = 1.0;  // rho^k
  for (std::size_t k = 0;; ++k) {
    const double f = -std::expm1(-static_cast<double>(k) * eps);
    const double right = 1.0 - rho_k * rho;  // P(G <= k)
    const double left = 1.0 - rho_k;         // P(G <= k - 1)
    if (std::abs(right - f) > best.distance) best = {std::abs(right - f), k};
    if (k > 0 && std::abs(left - f) > best.distance) best = {std::abs(left - f), k - 1};
    rho_k *= rho;
    if (rho_k < 1e-18 && 1.0 - f < 1e-18) break;
  }
  return best;
}

std::vector<StationaryLimitPoint> stationary_limit_experiment(
    const Discipline& d, const ServiceDistribution& sd, std::span<const double> r_list,
    double beta, std::size_t n_cycles, std::size_t n_samples, std::uint64_t seed, int threads) {
  if (!(beta > 0.0)) throw UnsupportedRegime("stationary limit needs beta > 0");
  std::vector<StationaryLimitPoint> out;
  for (std::size_t idx = 0; idx < r_list.size(); ++idx) {
    StationaryLimitPoint pt;
    pt.params = make_params(r_list[idx], beta, sd);
    const double rho = pt.params.rho();
    pt.oracle = scaled_geometric_ks_distance(rho);

    const std::size_t k_max = std::max<std::size_t>(10, pt.oracle.argmax_level + 1);
    auto est = stationary_estimate(d, sd, pt.params.lambda_r, n_cycles, n_samples, k_max, seed,
                                   1000 + idx, threads);
    const double scale = 1.0 - rho;
    pt.scaled_samples.reserve(est.samples.size());
    for (auto q : est.samples) pt.scaled_samples.push_back(scale * static_cast<double>(q));
    pt.ks_exp1 = stats::ks_one_sample(pt.scaled_samples,
                                      [](double x) { return x < 0.0 ? 0.0 : -std::expm1(-x); });
    // P(Q <= level) = 1 - P(Q >= level + 1) shares its standard error.
    if (est.n_cycles >= 30) pt.ecdf_se = est.p_ge[pt.oracle.argmax_level].std_error;
    pt.p_ge = std::move(est.p_ge);
    out.push_back(std::move(pt));
  }
  return out;
}

CollapseResult collapse_check(const Discipline& d, const ServiceDistribution& sd,
                              const ScalingParams& params, double t, std::size_t replications,
                              std::uint64_t seed, int threads) {
  const auto mo = sd.moments();
  if (!mo.second.is_finite()) {
    throw UnsupportedRegime(sd.name() + ": collapse check needs a finite second moment");
  }
  const double ratio = 2.0 * mo.mean / mo.second.value();
  const double raw_t = params.r * params.r * t;
  const double grid[1] = {raw_t};
  SimulationOptions opt;
  opt.record_workload = true;

  auto pairs = parallel::replicate<std::pair<double, double>>(
      replications, seed, 1,
      [&](std::size_t, Rng& rng) {
        const auto path = simulate(d, sd, params.lambda_r, raw_t, grid, rng, opt);
        return std::pair{static_cast<double>(path.queue_length.front()) / params.r,
                         path.workload.front() / params.r * ratio};
      },
      threads);

  CollapseResult res;
  for (const auto& [q, w] : pairs) {
    res.q_hat.push_back(q);
    res.w_scaled.push_back(w);
  }
  res.correlation = stats::pearson_correlation(res.q_hat, res.w_scaled);
  res.mean_abs_deviation = stats::mean_abs_deviation(res.q_hat, res.w_scaled);
  return res;
}

TwoTimeSamples two_time_samples(const Discipline& d, const ServiceDistribution& sd,
                                const ScalingParams& params, TimeScale scale, double t1,
                                double t2, std::size_t replications, std::uint64_t seed,
                                std::uint64_t stream, int threads) {
  if (!(t1 > 0.0 && t2 > t1)) throw std::invalid_argument("two_time_samples: need 0 < t1 < t2");
  const double f = time_factor(scale, params);
  const double grid[2] = {f * t1, f * t2};
  auto pairs = parallel::replicate<std::pair<double, double>>(
      replications, seed, stream,
      [&](std::size_t, Rng& rng) {
        const auto path = simulate(d, sd, params.lambda_r, grid[1], grid, rng);
        return std::pair{static_cast<double>(path.queue_length[0]) / params.r,
                         static_cast<double>(path.queue_length[1]) / params.r};
      },
      threads);
  TwoTimeSamples out;
  for (const auto& [a, b] : pairs) {
    out.q1.push_back(a);
    out.q2.push_back(b);
  }
  return out;
}

std::vector<ScaledPath> scaled_paths(const Discipline& d, const ServiceDistribution& sd,
                                     const ScalingParams& params, TimeScale scale, double T,
                                     double step, std::size_t replications, std::uint64_t seed,
                                     std::uint64_t stream, int threads) {
  const double f = time_factor(scale, params);
  const auto grid = raw_grid(T, step, f);
  return parallel::replicate<ScaledPath>(
      replications, seed, stream,
      [&](std::size_t, Rng& rng) {
        const auto path = simulate(d, sd, params.lambda_r, grid.back(), grid, rng);
        return rescale(path, f, params.r, T);
      },
      threads);
}

}  // namespace symq::scaling
