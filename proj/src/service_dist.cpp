#include "symq/service_dist.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/lambert_w.hpp>

namespace symq {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_positive(double v, const char* what) {
  require(std::isfinite(v) && v > 0.0, std::string(what) + " must be positive and finite");
}

}  // namespace

double SecondMoment::value() const {
  if (infinite_) throw UnsupportedRegime("second moment is infinite");
  return value_;
}

ServiceDistribution ServiceDistribution::exponential(double mean) {
  require_positive(mean, "exponential mean");
  return ServiceDistribution(service::Exponential{mean});
}

ServiceDistribution ServiceDistribution::deterministic(double value) {
  require_positive(value, "deterministic value");
  return ServiceDistribution(service::Deterministic{value});
}

ServiceDistribution ServiceDistribution::hyperexp(std::vector<double> probs,
                                                  std::vector<double> means) {
  require(!probs.empty() && probs.size() == means.size(),
          "hyperexp needs matching, non-empty probs and means");
  for (double p : probs) require(p >= 0.0 && std::isfinite(p), "hyperexp probs must be >= 0");
  for (double m : means) require_positive(m, "hyperexp phase mean");
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  require(std::abs(total - 1.0) <= 1e-9, "hyperexp probs must sum to 1");
  return ServiceDistribution(service::HyperExp{std::move(probs), std::move(means)});
}

ServiceDistribution ServiceDistribution::erlang(int k, double mean) {
  require(k >= 1, "erlang k must be >= 1");
  require_positive(mean, "erlang mean");
  return ServiceDistribution(service::Erlang{k, mean});
}

ServiceDistribution ServiceDistribution::pareto(double alpha, double x_min) {
  require(std::isfinite(alpha) && alpha > 1.0, "pareto alpha must exceed 1 (finite mean)");
  require_positive(x_min, "pareto xmin");
  return ServiceDistribution(service::Pareto{alpha, x_min});
}

ServiceDistribution ServiceDistribution::pareto_log(double alpha, double x_min) {
  require(std::isfinite(alpha) && alpha > 1.0, "paretolog alpha must exceed 1 (finite mean)");
  require_positive(x_min, "paretolog xmin");
  return ServiceDistribution(service::ParetoLog{alpha, x_min});
}

ServiceDistribution ServiceDistribution::with_mean(double target) const {
  require_positive(target, "target mean");
  const double s = target / mean();
  return std::visit(
      Overloaded{
          [&](const service::Exponential&) { return exponential(target); },
          [&](const service::Deterministic&) { return deterministic(target); },
          [&](const service::HyperExp& h) {
            auto means = h.means;
            for (auto& m : means) m *= s;
            return hyperexp(h.probs, std::move(means));
          },
          [&](const service::Erlang& e) { return erlang(e.k, target); },
          [&](const service::Pareto& p) { return pareto(p.alpha, p.x_min * s); },
          [&](const service::ParetoLog& p) { return pareto_log(p.alpha, p.x_min * s); },
      },
      law_);
}

std::string ServiceDistribution::name() const {
  return std::visit(Overloaded{
                        [](const service::Exponential&) { return std::string("exponential"); },
                        [](const service::Deterministic&) { return std::string("deterministic"); },
                        [](const service::HyperExp&) { return std::string("hyperexp"); },
                        [](const service::Erlang&) { return std::string("erlang"); },
                        [](const service::Pareto&) { return std::string("pareto"); },
                        [](const service::ParetoLog&) { return std::string("paretolog"); },
                    },
                    law_);
}

bool ServiceDistribution::heavy_tailed() const {
  return std::holds_alternative<service::Pareto>(law_) ||
         std::holds_alternative<service::ParetoLog>(law_);
}

double ServiceDistribution::alpha() const {
  if (const auto* p = std::get_if<service::Pareto>(&law_)) return p->alpha;
  if (const auto* p = std::get_if<service::ParetoLog>(&law_)) return p->alpha;
  throw UnsupportedRegime(name() + " has no tail index");
}

double ServiceDistribution::inverse_tail(double u) const {
  if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("inverse_tail: u must be in (0, 1]");
  if (const auto* p = std::get_if<service::Pareto>(&law_)) {
    return p->x_min * std::pow(u, -1.0 / p->alpha);
  }
  if (const auto* p = std::get_if<service::ParetoLog>(&law_)) {
    // (1 + s) e^{-alpha s} = u with s = log(x / x_min); the W_{-1} branch
    // gives -alpha (1 + s) directly.
    const double a = p->alpha;
    const double z = -a * u * std::exp(-a);
    const double w = u == 1.0 ? -a : boost::math::lambert_wm1(z);
    return p->x_min * std::exp(-w / a - 1.0);
  }
  throw UnsupportedRegime("inverse_tail is defined for pareto kinds only");
}

double ServiceDistribution::sample(Rng& rng) const {
  return std::visit(
      Overloaded{
          [&](const service::Exponential& e) { return rng.exponential(e.mean); },
          [&](const service::Deterministic& d) { return d.value; },
          [&](const service::HyperExp& h) {
            const double u = rng.uniform();
            double cumulative = 0.0;
            std::size_t j = 0;
            for (; j + 1 < h.probs.size(); ++j) {
              cumulative += h.probs[j];
              if (u < cumulative) break;
            }
            return rng.exponential(h.means[j]);
          },
          [&](const service::Erlang& e) {
            double log_sum = 0.0;
            for (int j = 0; j < e.k; ++j) log_sum += std::log(rng.uniform_pos());
            return -log_sum * e.mean / e.k;
          },
          [&](const service::Pareto&) { return inverse_tail(rng.uniform_pos()); },
          [&](const service::ParetoLog&) { return inverse_tail(rng.uniform_pos()); },
      },
      law_);
}

double ServiceDistribution::mean() const { return moments().mean; }

Moments ServiceDistribution::moments() const {
  return std::visit(
      Overloaded{
          [](const service::Exponential& e) {
            return Moments{e.mean, SecondMoment::finite(2.0 * e.mean * e.mean)};
          },
          [](const service::Deterministic& d) {
            return Moments{d.value, SecondMoment::finite(d.value * d.value)};
          },
          [](const service::HyperExp& h) {
            double m = 0.0, s2 = 0.0;
            for (std::size_t j = 0; j < h.probs.size(); ++j) {
              m += h.probs[j] * h.means[j];
              s2 += 2.0 * h.probs[j] * h.means[j] * h.means[j];
            }
            return Moments{m, SecondMoment::finite(s2)};
          },
          [](const service::Erlang& e) {
            return Moments{e.mean, SecondMoment::finite(e.mean * e.mean * (e.k + 1.0) / e.k)};
          },
          [](const service::Pareto& p) {
            const double m = p.alpha * p.x_min / (p.alpha - 1.0);
            if (p.alpha <= 2.0) return Moments{m, SecondMoment::infinite()};
            return Moments{m, SecondMoment::finite(p.alpha * p.x_min * p.x_min / (p.alpha - 2.0))};
          },
          [](const service::ParetoLog& p) {
            // E[S] = x_min (1 + int_1^inf (1 + log y) y^-alpha dy)
            const double a1 = p.alpha - 1.0;
            const double m = p.x_min * (1.0 + 1.0 / a1 + 1.0 / (a1 * a1));
            if (p.alpha <= 2.0) return Moments{m, SecondMoment::infinite()};
            const double a2 = p.alpha - 2.0;
            const double s2 = p.x_min * p.x_min * (1.0 + 2.0 * (1.0 / a2 + 1.0 / (a2 * a2)));
            return Moments{m, SecondMoment::finite(s2)};
          },
      },
      law_);
}

double ServiceDistribution::tail(double x) const {
  return std::visit(
      Overloaded{
          [x](const service::Exponential& e) { return x < 0.0 ? 1.0 : std::exp(-x / e.mean); },
          [x](const service::Deterministic& d) { return x < d.value ? 1.0 : 0.0; },
          [x](const service::HyperExp& h) {
            if (x < 0.0) return 1.0;
            double t = 0.0;
            for (std::size_t j = 0; j < h.probs.size(); ++j) t += h.probs[j] * std::exp(-x / h.means[j]);
            return t;
          },
          [x](const service::Erlang& e) {
            if (x <= 0.0) return 1.0;
            const double theta_x = x * e.k / e.mean;
            double term = 1.0, sum = 1.0;
            for (int j = 1; j < e.k; ++j) {
              term *= theta_x / j;
              sum += term;
            }
            return std::exp(-theta_x) * sum;
          },
          [x](const service::Pareto& p) {
            return x < p.x_min ? 1.0 : std::pow(x / p.x_min, -p.alpha);
          },
          [x](const service::ParetoLog& p) {
            if (x < p.x_min) return 1.0;
            const double y = x / p.x_min;
            return std::min(1.0, (1.0 + std::log(y)) * std::pow(y, -p.alpha));
          },
      },
      law_);
}

double ServiceDistribution::equilibrium_residual_mean() const {
  const auto mo = moments();
  if (!mo.second.is_finite()) {
    throw UnsupportedRegime(name() + ": equilibrium residual mean needs a finite second moment");
  }
  return mo.second.value() / (2.0 * mo.mean);
}

CrSolution ServiceDistribution::solve_cr(double r) const {
  if (!heavy_tailed()) throw UnsupportedRegime("c_r is defined for regularly varying tails only");
  const double a = alpha();
  if (!(a > 1.0 && a < 2.0)) throw UnsupportedRegime("c_r requires alpha in (1,2)");
  if (!(r >= 1.0) || !std::isfinite(r)) throw std::invalid_argument("solve_cr: r must be >= 1");

  const double x_min = std::visit(
      Overloaded{[](const service::Pareto& p) { return p.x_min; },
                 [](const service::ParetoLog& p) { return p.x_min; },
                 [](const auto&) { return 0.0; }},
      law_);
  const double target = 1.0 / r;
  auto f = [this](double x) { return x * tail(x); };
  auto residual = [&](double x) { return std::abs(f(x) - target) * r; };

  if (f(x_min) <= target) return {x_min, true, residual(x_min)};

  // x Fbar(x) may rise before it falls (ParetoLog), but {x >= x_min : f(x) <= 1/r}
  // is an interval [c_r, inf), so bisecting on the predicate is exact.
  double lo = x_min, hi = 2.0 * x_min;
  while (f(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::runtime_error("solve_cr: no bracket found");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) <= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {hi, false, residual(hi)};
}

}  // namespace symq
