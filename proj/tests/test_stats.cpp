#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "symq/engine.hpp"
#include "symq/stats.hpp"

using namespace symq;
using namespace symq::stats;

namespace {

double exp_cdf(double x) { return x < 0 ? 0.0 : 1.0 - std::exp(-x); }

std::vector<std::uint64_t> geometric_counts(double rho, std::size_t n, Rng& rng) {
  std::vector<std::size_t> k(n);
  for (auto& v : k) {
    std::size_t j = 0;
    while (rng.uniform() < rho) ++j;
    v = j;
  }
  return counts(k);
}

CycleStats cycle(double length, double area, std::size_t max_q) {
  CycleStats c;
  c.cycle_length = length;
  c.busy_length = length / 2;
  c.area = area;
  c.max_q = max_q;
  c.customers_served = max_q;
  return c;
}

}  // namespace

TEST_CASE("ecdf is a right-continuous step function") {
  const Ecdf f({3, 1, 2, 2});
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(f(-inf) == 0.0);
  CHECK(f(inf) == 1.0);
  CHECK(f(0.999) == 0.0);
  CHECK(f(1) == 0.25);
  CHECK(f(2) == 0.75);
  CHECK(f(2.5) == 0.75);
  CHECK(f(3) == 1.0);
}

TEST_CASE("two-sample KS examples") {
  const std::vector<double> a{1, 2}, b{3, 4}, c{1, 3}, d{2, 4};
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  CHECK(ks_two_sample(a, b).statistic == 1.0);
  CHECK(ks_two_sample(c, d).statistic == 0.5);
  CHECK_THROWS(ks_two_sample(a, std::vector<double>{}));

  const std::vector<double> e{0, 0, 1, 2, 2, 2}, f{0, 1, 1, 1, 3};
  const double s = ks_two_sample(e, f).statistic;
  // Hand-computed: at x = 0 gap |2/6 - 1/5|, at x = 1 |3/6 - 4/5| = 0.3, at 2 |1 - 4/5|.
  CHECK(s == doctest::Approx(0.3));
}

TEST_CASE("one-sample KS examples") {
  CHECK(ks_one_sample(std::vector<double>{0.0}, exp_cdf).statistic == 1.0);
  CHECK_THROWS(ks_one_sample(std::vector<double>{}, exp_cdf));
  const auto r = ks_one_sample(std::vector<double>{0.5}, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(r.statistic == 0.5);
}

TEST_CASE("tests are permutation invariant") {
  Rng rng(1);
  std::vector<double> a(500), b(400);
  for (auto& v : a) v = rng.exponential(1);
  for (auto& v : b) v = std::floor(rng.exponential(2));
  const auto ks2 = ks_two_sample(a, b).statistic;
  const auto ks1 = ks_one_sample(b, exp_cdf).statistic;
  std::reverse(a.begin(), a.end());
  std::rotate(b.begin(), b.begin() + 123, b.end());
  CHECK(ks_two_sample(a, b).statistic == ks2);
  CHECK(ks_two_sample(b, a).statistic == ks2);
  CHECK(ks_one_sample(b, exp_cdf).statistic == ks1);

  std::vector<CycleStats> cs;
  for (int i = 0; i < 100; ++i) cs.push_back(cycle(1 + rng.uniform(), rng.uniform() * 3, 1 + i % 4));
  auto area = [](const CycleStats& c) { return c.area; };
  const auto e1 = regenerative_ci(cs, area);
  std::reverse(cs.begin(), cs.end());
  const auto e2 = regenerative_ci(cs, area);
  CHECK(e1.estimate == doctest::Approx(e2.estimate).epsilon(1e-14));
  CHECK(e1.std_error == doctest::Approx(e2.std_error).epsilon(1e-12));
}

TEST_CASE("Kolmogorov survival reference values") {
  CHECK(kolmogorov_survival(1.3580986393225507) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(kolmogorov_survival(1.6276236115189086) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(10.0) < 1e-40);
}

TEST_CASE("chi-square examples") {
  const std::vector<std::uint64_t> a{10, 20, 30, 40};
  const auto same = chi_square_pmf(a, a);
  CHECK(same.statistic == 0.0);
  CHECK_FALSE(same.reject01);

  const auto opp = chi_square_pmf(std::vector<std::uint64_t>{10, 0}, std::vector<std::uint64_t>{0, 10});
  CHECK(opp.statistic == doctest::Approx(20.0));
  CHECK(opp.df == 1);
  CHECK(opp.reject01);

  const auto one = chi_square_pmf(std::vector<std::uint64_t>{50}, std::vector<std::uint64_t>{40});
  CHECK(one.degenerate);
  CHECK_FALSE(one.reject05);

  const auto tiny = chi_square_pmf(std::vector<std::uint64_t>{1}, std::vector<std::uint64_t>{0, 1});
  CHECK(tiny.degenerate);
}

TEST_CASE("chi-square pools small tail cells") {
  // Cells 4 and 3 hold 2 + 5 observations, an expected 3.5 per sample, so
  // both fold into cell 2.
  const std::vector<std::uint64_t> a{50, 40, 8, 2, 0}, b{45, 40, 10, 3, 2};
  const auto r = chi_square_pmf(a, b);
  CHECK(r.df == 2);
  // Oracle from the pooled 3x2 table.
  const double cells_a[] = {50, 40, 10}, cells_b[] = {45, 40, 15};
  double stat = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double tot = cells_a[k] + cells_b[k];
    const double ea = tot * 100.0 / 200.0, eb = tot * 100.0 / 200.0;
    stat += (cells_a[k] - ea) * (cells_a[k] - ea) / ea + (cells_b[k] - eb) * (cells_b[k] - eb) / eb;
  }
  CHECK(r.statistic == doctest::Approx(stat));
  CHECK(r.p_value == doctest::Approx(chi_square_survival(stat, 2)));
}

TEST_CASE("chi-square survival reference values") {
  CHECK(chi_square_survival(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_square_survival(9.21034037197618, 2) == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(chi_square_survival(0.0, 3) == 1.0);
}

TEST_CASE("null calibration over 500 repeats") {
  const int repeats = 500;
  int ks1 = 0, ks2 = 0, chi = 0;
  for (int i = 0; i < repeats; ++i) {
    Rng rng(100, {static_cast<std::uint64_t>(i)});
    std::vector<double> a(1000), b(1000);
    for (auto& v : a) v = rng.exponential(1);
    for (auto& v : b) v = rng.exponential(1);
    ks1 += ks_one_sample(a, exp_cdf).reject05;
    ks2 += ks_two_sample(a, b).reject05;
    const auto ca = geometric_counts(0.7, 2000, rng), cb = geometric_counts(0.7, 2000, rng);
    chi += chi_square_pmf(ca, cb).reject05;
  }
  // 5% +- 2 percentage points.
  for (int hits : {ks1, ks2, chi}) {
    const double rate = static_cast<double>(hits) / repeats;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
  }
}

TEST_CASE("independent M/M/1 samples of one law are not rejected") {
  const int repeats = 200;
  int kept = 0;
  const auto sd = ServiceDistribution::exponential(1.0);
  const std::vector<double> grid{8.0};
  for (int i = 0; i < repeats; ++i) {
    std::vector<std::size_t> qa, qb;
    for (int k = 0; k < 1000; ++k) {
      Rng ra(200, {static_cast<std::uint64_t>(i), 0, static_cast<std::uint64_t>(k)});
      Rng rb(200, {static_cast<std::uint64_t>(i), 1, static_cast<std::uint64_t>(k)});
      qa.push_back(simulate(Discipline::ps(), sd, 0.8, 8.0, grid, ra).queue_length[0]);
      qb.push_back(simulate(Discipline::ps(), sd, 0.8, 8.0, grid, rb).queue_length[0]);
    }
    kept += !chi_square_pmf(counts(qa), counts(qb)).reject01;
  }
  CHECK(kept >= 0.95 * repeats);
}

TEST_CASE("regenerative interval") {
  std::vector<CycleStats> same(40, cycle(2.0, 3.0, 2));
  const auto r = regenerative_ci(same, [](const CycleStats& c) { return c.area; });
  CHECK(r.estimate == doctest::Approx(1.5));
  CHECK(r.upper - r.lower == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<CycleStats> few(29, cycle(1, 1, 1));
  CHECK_THROWS(regenerative_ci(few, [](const CycleStats& c) { return c.area; }));
}

TEST_CASE("tail curve edges") {
  std::vector<CycleStats> cs;
  for (std::size_t m : {1u, 1u, 2u, 3u, 5u}) cs.push_back(cycle(1, 1, m));
  const std::vector<double> grid{0, 1, 2, 4, 10};
  const auto t = tail_curve(cs, grid);
  REQUIRE(t.size() == 5);
  CHECK(t[0].p == 1.0);
  CHECK(t[1].p == doctest::Approx(0.6));
  CHECK(t[2].p == doctest::Approx(0.4));
  CHECK(t[3].p == doctest::Approx(0.2));
  CHECK(t[4].p == 0.0);
  CHECK(t[4].lower == 0.0);
  CHECK(t[4].upper > 0.0);
  CHECK(std::isnan(t[0].log10_x));
  CHECK(std::isnan(t[4].log10_p));
  CHECK(t[1].log10_x == doctest::Approx(0.0));
  for (const auto& p : t) CHECK((p.lower <= p.p && p.p <= p.upper));
}

TEST_CASE("time-average pmf and sampling") {
  CycleStats c;
  c.cycle_length = 4;
  c.level_time = {1, 2, 1};
  const std::vector<CycleStats> cs{c};
  const auto pmf = time_average_pmf(cs);
  REQUIRE(pmf.size() == 3);
  CHECK(pmf[0] == 0.25);
  CHECK(pmf[1] == 0.5);
  CHECK(pmf[2] == 0.25);

  Rng rng(1);
  const auto s = sample_pmf(pmf, 400'000, rng);
  const auto n = counts(s);
  REQUIRE(n.size() == 3);
  for (int k = 0; k < 3; ++k) {
    const double se = std::sqrt(pmf[k] * (1 - pmf[k]) / 400'000);
    CHECK(std::abs(n[k] / 400'000.0 - pmf[k]) <= 4 * se);
  }
}

TEST_CASE("correlation and deviation") {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{4, 3, 2, 1};
  CHECK(pearson_correlation(x, y) == doctest::Approx(1.0));
  CHECK(pearson_correlation(x, z) == doctest::Approx(-1.0));
  CHECK(mean_abs_deviation(x, y) == doctest::Approx(2.5));
  CHECK(mean(x) == 2.5);
}
