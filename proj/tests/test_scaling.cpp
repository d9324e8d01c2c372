#include <doctest.h>

#include <cmath>

#include "symq/scaling.hpp"

using namespace symq;
using namespace symq::scaling;

namespace {

SamplePath grid_path(std::vector<double> times, std::vector<std::size_t> q) {
  SamplePath p;
  p.times = std::move(times);
  p.queue_length = std::move(q);
  return p;
}

// sup_x |P((1-rho) G <= x) - (1 - e^-x)| on a dense grid, with left limits
// approximated just below each grid point.
double dense_geometric_ks(double rho) {
  const double eps = 1 - rho;
  auto geo = [&](double x) {
    if (x < 0) return 0.0;
    const double k = std::floor(x / eps + 1e-12);
    return 1 - std::pow(rho, k + 1);
  };
  double best = 0.0;
  for (int i = 0; i <= 400'000; ++i) {
    const double x = i * 1e-4;
    const double e = -std::expm1(-x);
    best = std::max({best, std::abs(geo(x) - e), std::abs(geo(x - 1e-13) - e)});
  }
  return best;
}

}  // namespace

TEST_CASE("lambda_r examples") {
  CHECK(lambda_r(10, 1, 1) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(lambda_r(10, 0, 2) == 0.5);
  CHECK(lambda_r(100, 1, 1) == doctest::Approx(0.99).epsilon(1e-15));
  CHECK(std::abs(100 * (1 - lambda_r(100, 1, 1) * 1) - 1.0) <= 1e-12);
  CHECK_THROWS(lambda_r(0, 0, 1));
  CHECK_THROWS(lambda_r(-1, 0, 1));

  const auto p = make_params(10, 0, ServiceDistribution::deterministic(2));
  CHECK(p.critical);
  CHECK(p.rho() == 1.0);
  CHECK_FALSE(make_params(10, 1, ServiceDistribution::deterministic(2)).critical);
}

TEST_CASE("lambda_r identity across parameters") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double r = 1 + 1000 * rng.uniform();
    const double beta = r * rng.uniform();
    const double m = 0.01 + 10 * rng.uniform();
    CHECK(std::abs(r * (1 - lambda_r(r, beta, m) * m) - beta) <= 1e-12 * std::max(1.0, r));
  }
}

TEST_CASE("diffusion scaling examples") {
  const double r = 30;
  const auto path = grid_path({0, 450, 900}, {0, 12, 30});
  const auto s = diffusion_scale(path, r, 1.0);
  REQUIRE(s.t.size() == 3);
  CHECK(s.t.back() == 1.0);
  CHECK(s.value.back() == 1.0);
  CHECK(s.value.front() == 0.0);
  CHECK(s.value[1] == doctest::Approx(0.4));

  const auto flat = diffusion_scale(grid_path({0, 100, 200}, {7, 7, 7}), 7, 200.0 / 49);
  for (double v : flat.value) CHECK(v == 1.0);

  CHECK_THROWS(diffusion_scale(path, r, 2.0));
}

TEST_CASE("heavy-tail scaling examples") {
  const auto sd = ServiceDistribution::pareto(1.5, 1);
  const auto p = make_params(100, 1, sd, true);
  REQUIRE(p.c_r);
  CHECK(*p.c_r == doctest::Approx(1e4).epsilon(1e-9));
  CHECK(time_factor(TimeScale::heavy_tail, p) == *p.c_r);
  CHECK(time_factor(TimeScale::diffusion, p) == 1e4);

  const auto path = grid_path({0, 5000, 10000}, {0, 50, 100});
  const auto s = heavy_tail_scale(path, 100, *p.c_r, 1.0);
  CHECK(s.value == std::vector<double>{0, 0.5, 1});
  CHECK(s.t == std::vector<double>{0, 0.5, 1});
  const auto flat = heavy_tail_scale(grid_path({0, 5000, 10000}, {100, 100, 100}), 100, 1e4, 1.0);
  for (double v : flat.value) CHECK(v == 1.0);
}

TEST_CASE("raw grid") {
  const auto g = raw_grid(2.0, 0.01, 100.0);
  REQUIRE(g.size() == 201);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(200.0));
}

TEST_CASE("scaled paths start at zero and cover the horizon") {
  const auto sd = ServiceDistribution::exponential(1);
  const auto p = make_params(10, 1, sd);
  const auto paths = scaled_paths(Discipline::ps(), sd, p, TimeScale::diffusion, 2.0, 0.01, 3, 1, 0);
  REQUIRE(paths.size() == 3);
  for (const auto& s : paths) {
    CHECK(s.t.size() == 201);
    CHECK(s.value.front() == 0.0);
    CHECK(s.t.back() == doctest::Approx(2.0));
  }
}

TEST_CASE("geometric KS distance matches a dense-grid scan") {
  for (double rho : {0.0, 0.3, 0.5, 0.8, 0.9, 0.97}) {
    const auto g = scaled_geometric_ks_distance(rho);
    CHECK(g.distance == doctest::Approx(dense_geometric_ks(rho)).epsilon(1e-9));
    CHECK(g.distance == doctest::Approx(1 - rho).epsilon(1e-12));
  }
}

TEST_CASE("single replication is flagged") {
  const auto sd = ServiceDistribution::exponential(1);
  const Discipline ds[] = {Discipline::ps(), Discipline::lcfs()};
  const auto res = transient_marginal_experiment(ds, sd, make_params(5, 1, sd), TimeScale::diffusion,
                                                 0.5, 1, 3);
  CHECK(res.insufficient_data);
  REQUIRE(res.pairs.size() == 1);
  CHECK(res.pairs[0].test.degenerate);
  CHECK_FALSE(res.pairs[0].test.reject05);
}

TEST_CASE("same discipline twice calibrates the marginal test") {
  const auto sd = ServiceDistribution::exponential(1);
  const Discipline ds[] = {Discipline::ps(), Discipline::ps()};
  const auto p = make_params(5, 1, sd);
  int rejected = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto res = transient_marginal_experiment(ds, sd, p, TimeScale::diffusion, 0.5, 1000, 500 + i);
    rejected += res.pairs[0].test.reject01;
  }
  // 99% non-rejection: Binomial(100, 0.01) exceeds 4 with probability 0.003.
  CHECK(rejected <= 4);
}

TEST_CASE("results do not depend on thread count") {
  const auto sd = ServiceDistribution::hyperexp({0.9, 0.1}, {0.5, 5.5});
  const Discipline ds[] = {Discipline::ps(), Discipline::lcfs()};
  const auto p = make_params(5, 1, sd);
  const auto a = transient_marginal_experiment(ds, sd, p, TimeScale::diffusion, 0.5, 300, 7, 1);
  const auto b = transient_marginal_experiment(ds, sd, p, TimeScale::diffusion, 0.5, 300, 7, 4);
  CHECK(a.counts == b.counts);

  const auto c1 = regenerative_cycles(Discipline::ps(), sd, 0.7, 1000, 7, 1, 1);
  const auto c4 = regenerative_cycles(Discipline::ps(), sd, 0.7, 1000, 7, 1, 4);
  REQUIRE(c1.size() == 1000);
  REQUIRE(c4.size() == 1000);
  for (std::size_t i = 0; i < c1.size(); ++i) {
    CHECK(c1[i].area == c4[i].area);
    CHECK(c1[i].cycle_length == c4[i].cycle_length);
  }

  const auto s1 = stationary_estimate(Discipline::ps(), sd, 0.7, 2000, 500, 3, 9, 2, 1);
  const auto s4 = stationary_estimate(Discipline::ps(), sd, 0.7, 2000, 500, 3, 9, 2, 3);
  CHECK(s1.samples == s4.samples);
  CHECK(s1.pmf == s4.pmf);
}

TEST_CASE("stationary estimate reproduces rho^k") {
  const auto sd = ServiceDistribution::erlang(2, 1);
  const auto est = stationary_estimate(Discipline::lcfs(), sd, 0.6, 50'000, 1000, 5, 3, 1);
  REQUIRE(est.p_ge.size() == 5);
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto& e = est.p_ge[k - 1];
    CHECK(std::abs(e.estimate - std::pow(0.6, k)) <= 4 * e.std_error);
  }
  double total = 0;
  for (double v : est.pmf) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stationary limit at rho = 0 is degenerate") {
  const auto sd = ServiceDistribution::exponential(1);
  const std::vector<double> rs{4};
  const auto pts = stationary_limit_experiment(Discipline::ps(), sd, rs, 4.0, 100, 50, 1);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].params.rho() == 0.0);
  for (double v : pts[0].scaled_samples) CHECK(v == 0.0);
  CHECK(pts[0].ks_exp1.statistic == 1.0);
  CHECK(pts[0].oracle.distance == 1.0);
}

TEST_CASE("collapse check") {
  const auto sd = ServiceDistribution::exponential(1);
  const auto res = collapse_check(Discipline::ps(), sd, make_params(10, 1, sd), 1.0, 400, 2);
  CHECK(res.q_hat.size() == 400);
  CHECK(res.correlation > 0.5);
  CHECK_THROWS_AS(collapse_check(Discipline::ps(), ServiceDistribution::pareto(1.5, 1),
                                 make_params(10, 1, ServiceDistribution::pareto(1.5, 1)), 1.0, 10, 2),
                  UnsupportedRegime);
}

TEST_CASE("two-time samples") {
  const auto sd = ServiceDistribution::pareto(1.5, 1.0 / 3.0);
  const auto p = make_params(10, 1, sd, true);
  const auto s = two_time_samples(Discipline::lcfs(), sd, p, TimeScale::heavy_tail, 0.5, 1.0, 50, 1, 0);
  CHECK(s.q1.size() == 50);
  CHECK(s.q2.size() == 50);
  CHECK_THROWS(two_time_samples(Discipline::lcfs(), sd, p, TimeScale::heavy_tail, 1.0, 0.5, 5, 1, 0));
}
