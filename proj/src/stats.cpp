#include "symq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace symq::stats {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kZ975 = 1.959963984540054;

void flag_rejections(TestResult& r) {
  r.reject01 = !r.degenerate && r.p_value < 0.01;
  r.reject05 = !r.degenerate && r.p_value < 0.05;
}

}  // namespace

Ecdf::Ecdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const {
  if (sorted_.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // P(K <= lambda) = sqrt(2 pi) / lambda * sum exp(-(2k-1)^2 pi^2 / (8 lambda^2))
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double term = std::exp(c * (2.0 * k - 1.0) * (2.0 * k - 1.0));
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());

  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }

  TestResult r;
  r.statistic = d;
  r.n1 = x.size();
  r.n2 = y.size();
  const double ne = n1 * n2 / (n1 + n2);
  r.p_value = kolmogorov_survival(std::sqrt(ne) * d);
  flag_rejections(r);
  return r;
}

TestResult ks_one_sample(std::span<const double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  TestResult r;
  r.statistic = d;
  r.n1 = x.size();
  r.p_value = kolmogorov_survival(std::sqrt(n) * d);
  flag_rejections(r);
  return r;
}

double chi_square_survival(double x, std::size_t df) {
  if (df == 0) return 1.0;
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

TestResult chi_square_pmf(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  const std::size_t len = std::max(a.size(), b.size());
  auto at = [](std::span<const std::uint64_t> v, std::size_t k) -> double {
    return k < v.size() ? static_cast<double>(v[k]) : 0.0;
  };
  const double na = std::accumulate(a.begin(), a.end(), 0.0);
  const double nb = std::accumulate(b.begin(), b.end(), 0.0);
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("chi_square_pmf: empty sample");
  const double total = na + nb;

  struct Cell {
    double a, b;
  };
  std::vector<Cell> cells;
  Cell open{0.0, 0.0};
  for (std::size_t k = len; k-- > 0;) {
    open.a += at(a, k);
    open.b += at(b, k);
    const double pooled = open.a + open.b;
    if (na * pooled / total >= 5.0 && nb * pooled / total >= 5.0) {
      cells.push_back(open);
      open = {0.0, 0.0};
    }
  }
  if (open.a + open.b > 0.0) {
    if (cells.empty()) {
      cells.push_back(open);
    } else {
      cells.back().a += open.a;
      cells.back().b += open.b;
    }
  }

  TestResult r;
  r.n1 = static_cast<std::size_t>(na);
  r.n2 = static_cast<std::size_t>(nb);
  if (cells.size() < 2) {
    r.degenerate = true;
    return r;
  }
  double stat = 0.0;
  for (const auto& c : cells) {
    const double pooled = c.a + c.b;
    const double ea = na * pooled / total, eb = nb * pooled / total;
    stat += (c.a - ea) * (c.a - ea) / ea + (c.b - eb) * (c.b - eb) / eb;
  }
  r.statistic = stat;
  r.df = cells.size() - 1;
  r.p_value = chi_square_survival(stat, r.df);
  flag_rejections(r);
  return r;
}

RatioEstimate ratio_ci(std::span<const double> y, std::span<const double> len) {
  const std::size_t n = y.size();
  if (len.size() != n) throw std::invalid_argument("ratio_ci: size mismatch");
  if (n < 30) throw std::invalid_argument("regenerative_ci: need at least 30 cycles");
  double sy = 0.0, sl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sy += y[i];
    sl += len[i];
  }
  const double theta = sy / sl;
  const double nd = static_cast<double>(n);

  // Jackknife pseudo-values.
  double mean_ps = 0.0;
  std::vector<double> ps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double loo = (sy - y[i]) / (sl - len[i]);
    ps[i] = nd * theta - (nd - 1.0) * loo;
    mean_ps += ps[i];
  }
  mean_ps /= nd;
  double ss = 0.0;
  for (double p : ps) ss += (p - mean_ps) * (p - mean_ps);
  const double se = std::sqrt(ss / (nd * (nd - 1.0)));

  return {theta, se, theta - kZ975 * se, theta + kZ975 * se};
}

RatioEstimate regenerative_ci(std::span<const CycleStats> cycles,
                              const std::function<double(const CycleStats&)>& f) {
  std::vector<double> y(cycles.size()), l(cycles.size());
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    y[i] = f(cycles[i]);
    l[i] = cycles[i].cycle_length;
  }
  return ratio_ci(y, l);
}

std::vector<TailPoint> tail_curve(std::span<const CycleStats> cycles,
                                  std::span<const double> x_grid) {
  if (cycles.empty()) throw std::invalid_argument("tail_curve: no cycles");
  std::vector<std::size_t> maxima;
  maxima.reserve(cycles.size());
  for (const auto& c : cycles) maxima.push_back(c.max_q);
  std::sort(maxima.begin(), maxima.end());
  const double n = static_cast<double>(maxima.size());
  const double z2 = kZ975 * kZ975;

  std::vector<TailPoint> out;
  out.reserve(x_grid.size());
  for (double x : x_grid) {
    // count of max_q > x
    const auto it = std::upper_bound(maxima.begin(), maxima.end(), x,
                                     [](double v, std::size_t m) { return v < static_cast<double>(m); });
    const double k = static_cast<double>(maxima.end() - it);
    const double p = k / n;
    const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = kZ975 / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    out.push_back({x, p, std::max(0.0, centre - half), std::min(1.0, centre + half),
                   x > 0.0 ? std::log10(x) : kNaN, p > 0.0 ? std::log10(p) : kNaN});
  }
  return out;
}

std::vector<double> time_average_pmf(std::span<const CycleStats> cycles) {
  std::vector<double> level;
  double total = 0.0;
  for (const auto& c : cycles) {
    if (c.level_time.size() > level.size()) level.resize(c.level_time.size(), 0.0);
    for (std::size_t k = 0; k < c.level_time.size(); ++k) level[k] += c.level_time[k];
    total += c.cycle_length;
  }
  if (total <= 0.0) throw std::invalid_argument("time_average_pmf: no time observed");
  for (auto& v : level) v /= total;
  return level;
}

std::vector<std::size_t> sample_pmf(std::span<const double> pmf, std::size_t n, Rng& rng) {
  if (pmf.empty()) throw std::invalid_argument("sample_pmf: empty pmf");
  std::vector<double> cdf(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
  const double total = cdf.back();
  std::vector<std::size_t> out(n);
  for (auto& v : out) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    v = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), pmf.size() - 1);
  }
  return out;
}

std::vector<std::uint64_t> counts(std::span<const std::size_t> values) {
  std::vector<std::uint64_t> out;
  for (auto v : values) {
    if (v >= out.size()) out.resize(v + 1, 0);
    ++out[v];
  }
  return out;
}

double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean: empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("pearson_correlation: need two equal samples of size >= 2");
  }
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

double mean_abs_deviation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("mean_abs_deviation: need two equal non-empty samples");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
  return s / static_cast<double>(x.size());
}

}  // namespace symq::stats
