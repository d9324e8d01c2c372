#include "symq/runner.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>

#include "symq/output.hpp"
#include "symq/rbm.hpp"
#include "symq/scaling.hpp"

namespace symq::cli {

using json = nlohmann::ordered_json;
using output::num;
using output::to_json;

namespace {

struct Ctx {
  const ExperimentConfig& c;
  std::filesystem::path dir;
  int threads;
  RunResult result;

  std::filesystem::path file(const std::string& name) {
    auto p = dir / name;
    result.files.push_back(p);
    return p;
  }
  void json_file(const std::string& name, const json& body) {
    output::write_json(file(name), c.raw, body);
  }
};

std::string u(std::size_t v) { return num(static_cast<std::uint64_t>(v)); }

json pairs_json(const std::vector<scaling::PairTest>& pairs, const std::vector<std::string>& labels) {
  json arr = json::array();
  for (const auto& p : pairs) {
    json e;
    e["a"] = labels[p.a];
    e["b"] = labels[p.b];
    e["test"] = to_json(p.test);
    e["df"] = p.test.df;
    e["degenerate"] = p.test.degenerate;
    arr.push_back(e);
  }
  return arr;
}

// Lambda, or the single r of the scaling block.
double load_of(const ExperimentConfig& c, const ServiceDistribution& sd) {
  if (c.lambda) return *c.lambda;
  if (c.scaling->r_list.size() != 1) throw ConfigError("field 'scaling': this experiment takes a single r");
  return scaling::lambda_r(c.scaling->r_list.front(), c.scaling->beta, sd.mean());
}

void run_stationary(Ctx& x) {
  const auto& c = x.c;
  const auto& d = c.disciplines.front();
  const auto& sd = c.services.front();
  output::CsvWriter tail(x.file("stationary_tail.csv"), c.raw,
                         {"r", "k", "p_ge_k", "rho_k", "se", "ci_low", "ci_high"});
  output::CsvWriter ecdf(x.file("stationary_ecdf.csv"), c.raw, {"r", "x", "ecdf"});

  auto emit_ecdf = [&](const std::string& r, const std::vector<double>& xs) {
    const stats::Ecdf f(xs);
    const auto& s = f.sorted();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i + 1 < s.size() && s[i + 1] == s[i]) continue;
      ecdf.row({r, num(s[i]), num(f(s[i]))});
    }
  };
  auto emit_tail = [&](const std::string& r, double rho, const std::vector<stats::RatioEstimate>& p) {
    for (std::size_t k = 1; k <= p.size(); ++k) {
      const auto& e = p[k - 1];
      tail.row({r, u(k), num(e.estimate), num(std::pow(rho, static_cast<double>(k))), num(e.std_error),
                num(e.lower), num(e.upper)});
    }
  };

  if (c.lambda) {
    const auto est = scaling::stationary_estimate(d, sd, *c.lambda, c.cycles, c.samples, c.k_max,
                                                  c.seed, 1, x.threads);
    emit_tail("", est.rho, est.p_ge);
    std::vector<double> xs(est.samples.begin(), est.samples.end());
    emit_ecdf("", xs);
    json body;
    body["rho"] = est.rho;
    body["cycles"] = est.n_cycles;
    json within = json::array();
    for (std::size_t k = 1; k <= est.p_ge.size(); ++k) {
      const double target = std::pow(est.rho, static_cast<double>(k));
      within.push_back({{"k", k},
                        {"estimate", est.p_ge[k - 1].estimate},
                        {"rho_k", target},
                        {"z", (est.p_ge[k - 1].estimate - target) / est.p_ge[k - 1].std_error}});
    }
    body["p_ge_k"] = within;
    x.json_file("stationary_summary.json", body);
    return;
  }

  const auto points = scaling::stationary_limit_experiment(d, sd, c.scaling->r_list, c.scaling->beta,
                                                           c.cycles, c.samples, c.seed, x.threads);
  json arr = json::array();
  for (const auto& pt : points) {
    const std::string r = num(pt.params.r);
    emit_tail(r, pt.params.rho(), pt.p_ge);
    emit_ecdf(r, pt.scaled_samples);
    arr.push_back({{"r", pt.params.r},
                   {"rho", pt.params.rho()},
                   {"ks_exp1", to_json(pt.ks_exp1)},
                   {"oracle_ks", pt.oracle.distance},
                   {"ecdf_se", pt.ecdf_se}});
  }
  x.json_file("stationary_summary.json", json{{"points", arr}});
}

void run_insensitivity(Ctx& x) {
  const auto& c = x.c;
  const auto& d = c.disciplines.front();
  std::vector<ServiceDistribution> laws = c.services;
  std::vector<std::string> labels = c.service_labels;
  if (c.control) {
    laws.push_back(c.services.front());
    labels.push_back(c.service_labels.front() + "#control");
  }
  output::CsvWriter pmf(x.file("insensitivity_pmf.csv"), c.raw, {"service", "k", "pmf", "count"});
  std::vector<std::vector<std::uint64_t>> counts;
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const double lambda = load_of(c, laws[i]);
    const auto est = scaling::stationary_estimate(d, laws[i], lambda, c.cycles, c.samples, 0,
                                                  c.seed, i + 1, x.threads);
    counts.push_back(stats::counts(est.samples));
    for (std::size_t k = 0; k < est.pmf.size(); ++k) {
      pmf.row({labels[i], u(k), num(est.pmf[k]),
               num(k < counts.back().size() ? counts.back()[k] : std::uint64_t{0})});
    }
  }
  const auto pairs = scaling::pairwise_chi_square(counts);
  x.json_file("insensitivity_tests.json", json{{"pairs", pairs_json(pairs, labels)}});
}

void run_transient(Ctx& x) {
  const auto& c = x.c;
  const auto& sd = c.services.front();
  const auto scale = c.timescale == "heavy-tail" ? scaling::TimeScale::heavy_tail
                                                  : scaling::TimeScale::diffusion;
  output::CsvWriter pmf(x.file("transient_pmf.csv"), c.raw, {"r", "t", "discipline", "k", "pmf"});
  json arr = json::array();
  for (double r : c.scaling->r_list) {
    const auto params = scaling::make_params(r, c.scaling->beta, sd,
                                             scale == scaling::TimeScale::heavy_tail);
    const auto res = scaling::transient_marginal_experiment(c.disciplines, sd, params, scale, c.t,
                                                            c.replications, c.seed, x.threads);
    for (std::size_t j = 0; j < res.counts.size(); ++j) {
      const double n = static_cast<double>(c.replications);
      for (std::size_t k = 0; k < res.counts[j].size(); ++k) {
        pmf.row({num(r), num(c.t), c.discipline_labels[j], u(k),
                 num(static_cast<double>(res.counts[j][k]) / n)});
      }
    }
    arr.push_back({{"r", r},
                   {"time_factor", res.time_factor},
                   {"insufficient_data", res.insufficient_data},
                   {"pairs", pairs_json(res.pairs, c.discipline_labels)}});
  }
  x.json_file("transient_tests.json", json{{"points", arr}});
}

void run_paths(Ctx& x, scaling::TimeScale scale, const std::string& prefix) {
  const auto& c = x.c;
  const auto& sd = c.services.front();
  output::CsvWriter paths(x.file(prefix + "_paths.csv"), c.raw,
                          {"r", "discipline", "replication", "t", "q_hat"});
  output::CsvWriter mean(x.file(prefix + "_mean.csv"), c.raw,
                         {"r", "discipline", "t", "mean", "sd"});
  const std::size_t reps = prefix == "diffusion" ? c.replications : c.path_replications;
  for (std::size_t ri = 0; ri < c.scaling->r_list.size(); ++ri) {
    const double r = c.scaling->r_list[ri];
    const auto params =
        scaling::make_params(r, c.scaling->beta, sd, scale == scaling::TimeScale::heavy_tail);
    for (std::size_t j = 0; j < c.disciplines.size(); ++j) {
      if (reps == 0) continue;
      const auto ps = scaling::scaled_paths(c.disciplines[j], sd, params, scale, c.horizon, c.step,
                                            reps, c.seed, 100 * (ri + 1) + j, x.threads);
      const std::size_t shown = std::min<std::size_t>(ps.size(), 10);
      for (std::size_t k = 0; k < shown; ++k) {
        for (std::size_t g = 0; g < ps[k].t.size(); ++g) {
          paths.row({num(r), c.discipline_labels[j], u(k), num(ps[k].t[g]), num(ps[k].value[g])});
        }
      }
      for (std::size_t g = 0; g < ps.front().t.size(); ++g) {
        double s = 0.0, s2 = 0.0;
        for (const auto& p : ps) {
          s += p.value[g];
          s2 += p.value[g] * p.value[g];
        }
        const double n = static_cast<double>(ps.size());
        const double m = s / n;
        mean.row({num(r), c.discipline_labels[j], num(ps.front().t[g]), num(m),
                  num(std::sqrt(std::max(0.0, s2 / n - m * m)))});
      }
    }
  }
  if (c.event_log) {
    const double r = c.scaling->r_list.front();
    const auto params =
        scaling::make_params(r, c.scaling->beta, sd, scale == scaling::TimeScale::heavy_tail);
    const double horizon = scaling::time_factor(scale, params) * c.horizon;
    Rng rng(c.seed, {999});
    SimulationOptions opt;
    opt.record_events = true;
    const auto path = simulate(c.disciplines.front(), sd, params.lambda_r, horizon, {}, rng, opt);
    output::write_event_log(x.file(prefix + "_events.csv"), c.raw, path.events);
  }
}

void run_heavy_tail(Ctx& x) {
  const auto& c = x.c;
  const auto& sd = c.services.front();
  const double t1 = c.times[0], t2 = c.times[1];
  run_paths(x, scaling::TimeScale::heavy_tail, "heavy_tail");

  std::vector<output::CsvWriter> writers;
  for (const auto& label : c.discipline_labels) {
    writers.emplace_back(x.file("heavy_tail_two_time_" + label + ".csv"), c.raw,
                         std::vector<std::string>{"r", "t1", "t2", "q1", "q2"});
  }
  json arr = json::array();
  for (std::size_t ri = 0; ri < c.scaling->r_list.size(); ++ri) {
    const double r = c.scaling->r_list[ri];
    const auto params = scaling::make_params(r, c.scaling->beta, sd, true);
    std::vector<scaling::TwoTimeSamples> samples;
    for (std::size_t j = 0; j < c.disciplines.size(); ++j) {
      samples.push_back(scaling::two_time_samples(c.disciplines[j], sd, params,
                                                  scaling::TimeScale::heavy_tail, t1, t2,
                                                  c.replications, c.seed, 1000 * (ri + 1) + j,
                                                  x.threads));
      const auto& s = samples.back();
      for (std::size_t i = 0; i < s.q1.size(); ++i) {
        writers[j].row({num(r), num(t1), num(t2), num(s.q1[i]), num(s.q2[i])});
      }
    }
    // Marginals at each time, and the joint law on a flattened (k1, k2) grid.
    auto to_counts = [&](auto pick) {
      std::vector<std::vector<std::uint64_t>> out;
      for (const auto& s : samples) out.push_back(pick(s));
      return out;
    };
    auto level = [r](double q) { return static_cast<std::size_t>(std::llround(q * r)); };
    auto marg = [&](const std::vector<double>& q) {
      std::vector<std::size_t> k;
      for (double v : q) k.push_back(level(v));
      return stats::counts(k);
    };
    std::size_t width = 0;
    for (const auto& s : samples) {
      for (double v : s.q2) width = std::max(width, level(v) + 1);
    }
    const auto c1 = to_counts([&](const auto& s) { return marg(s.q1); });
    const auto c2 = to_counts([&](const auto& s) { return marg(s.q2); });
    const auto joint = to_counts([&](const auto& s) {
      std::vector<std::size_t> k;
      for (std::size_t i = 0; i < s.q1.size(); ++i) k.push_back(level(s.q1[i]) * width + level(s.q2[i]));
      return stats::counts(k);
    });

    json disc = json::array();
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const auto& s = samples[j];
      double cross = 0.0, inc_mean = 0.0;
      for (std::size_t i = 0; i < s.q1.size(); ++i) {
        cross += s.q1[i] * s.q2[i];
        inc_mean += std::abs(s.q2[i] - s.q1[i]);
      }
      const double n = static_cast<double>(s.q1.size());
      disc.push_back({{"discipline", c.discipline_labels[j]},
                      {"mean_q1", stats::mean(s.q1)},
                      {"mean_q2", stats::mean(s.q2)},
                      {"e_q1q2", cross / n},
                      {"mean_abs_increment", inc_mean / n},
                      {"correlation", stats::pearson_correlation(s.q1, s.q2)}});
    }
    arr.push_back({{"r", r},
                   {"c_r", *params.c_r},
                   {"disciplines", disc},
                   {"marginal_t1", pairs_json(scaling::pairwise_chi_square(c1), c.discipline_labels)},
                   {"marginal_t2", pairs_json(scaling::pairwise_chi_square(c2), c.discipline_labels)},
                   {"joint", pairs_json(scaling::pairwise_chi_square(joint), c.discipline_labels)}});
  }
  x.json_file("heavy_tail_summary.json", json{{"t1", t1}, {"t2", t2}, {"points", arr}});
}

void run_collapse(Ctx& x) {
  const auto& c = x.c;
  const auto& sd = c.services.front();
  output::CsvWriter pairs(x.file("collapse_pairs.csv"), c.raw, {"r", "t", "q_hat", "w_scaled"});
  json arr = json::array();
  for (double r : c.scaling->r_list) {
    const auto params = scaling::make_params(r, c.scaling->beta, sd);
    const auto res = scaling::collapse_check(c.disciplines.front(), sd, params, c.t, c.replications,
                                             c.seed, x.threads);
    for (std::size_t i = 0; i < res.q_hat.size(); ++i) {
      pairs.row({num(r), num(c.t), num(res.q_hat[i]), num(res.w_scaled[i])});
    }
    arr.push_back({{"r", r},
                   {"correlation", res.correlation},
                   {"mean_abs_deviation", res.mean_abs_deviation}});
  }
  x.json_file("collapse_summary.json", json{{"points", arr}});
}

void run_rbm_compare(Ctx& x) {
  const auto& c = x.c;
  const auto& sd = c.services.front();
  const auto p = rbm::params_from_queue(sd, c.scaling->beta);
  output::CsvWriter ecdf(x.file("rbm_compare_ecdf.csv"), c.raw, {"r", "x", "ecdf", "rbm_cdf"});
  json arr = json::array();
  const Discipline* d = &c.disciplines.front();
  for (std::size_t ri = 0; ri < c.scaling->r_list.size(); ++ri) {
    const double r = c.scaling->r_list[ri];
    const auto params = scaling::make_params(r, c.scaling->beta, sd);
    const auto res = scaling::transient_marginal_experiment(
        std::span<const Discipline>(d, 1), sd, params, scaling::TimeScale::diffusion, c.t,
        c.replications, c.seed + ri, x.threads);
    std::vector<double> q_hat;
    for (std::size_t k = 0; k < res.counts[0].size(); ++k) {
      for (std::uint64_t i = 0; i < res.counts[0][k]; ++i) q_hat.push_back(static_cast<double>(k) / r);
    }
    const auto cdf = [&](double v) { return rbm::transition_cdf(v, c.t, p); };
    const auto ks = stats::ks_one_sample(q_hat, cdf);
    const stats::Ecdf f(q_hat);
    double cum = 0.0;
    for (std::size_t k = 0; k < res.counts[0].size(); ++k) {
      cum += static_cast<double>(res.counts[0][k]);
      const double v = static_cast<double>(k) / r;
      ecdf.row({num(r), num(v), num(cum / static_cast<double>(q_hat.size())), num(cdf(v))});
    }
    arr.push_back({{"r", r}, {"ks", to_json(ks)}});
  }
  x.json_file("rbm_compare.json",
              json{{"mu", p.mu}, {"sigma2", p.sigma2}, {"t", c.t}, {"points", arr}});
}

void run_cycle_tails(Ctx& x) {
  const auto& c = x.c;
  const auto& sd = c.services.front();
  const double lambda = load_of(c, sd);
  const auto cycles = scaling::regenerative_cycles(c.disciplines.front(), sd, lambda, c.cycles,
                                                   c.seed, 1, x.threads);
  std::vector<double> grid = c.x_grid;
  if (grid.empty()) {
    std::size_t top = 0;
    for (const auto& cy : cycles) top = std::max(top, cy.max_q);
    for (std::size_t k = 0; k <= top; ++k) grid.push_back(static_cast<double>(k));
  }
  output::CsvWriter w(x.file("cycle_tails.csv"), c.raw,
                      {"x", "p_gt_x", "ci_low", "ci_high", "log10_x", "log10_p"});
  for (const auto& t : stats::tail_curve(cycles, grid)) {
    w.row({num(t.x), num(t.p), num(t.lower), num(t.upper), num(t.log10_x), num(t.log10_p)});
  }
  json body;
  body["rho"] = lambda * sd.mean();
  body["cycles"] = cycles.size();
  if (cycles.size() >= 30) {
    const auto eq = stats::regenerative_ci(cycles, [](const CycleStats& cy) { return cy.area; });
    body["mean_queue_length"] = {{"estimate", eq.estimate}, {"ci_low", eq.lower}, {"ci_high", eq.upper}};
  }
  double served = 0.0;
  for (const auto& cy : cycles) served += static_cast<double>(cy.customers_served);
  body["mean_served_per_cycle"] = served / static_cast<double>(cycles.size());
  x.json_file("cycle_tails_summary.json", body);
}

void run_rbm_selftest(Ctx& x) {
  const auto& c = x.c;
  const auto p = *c.rbm;
  rbm::PathOptions opt;
  opt.substeps = c.substeps;
  opt.reflection = c.reflection == "euler" ? rbm::Reflection::euler : rbm::Reflection::bridge;
  const auto samples = rbm::marginal_samples(p, c.t, c.replications, c.seed, opt, x.threads);
  const auto cdf = [&](double v) { return rbm::transition_cdf(v, c.t, p); };
  const auto ks = stats::ks_one_sample(samples, cdf);

  output::CsvWriter w(x.file("rbm_selftest_cdf.csv"), c.raw, {"t", "x", "cdf", "ecdf"});
  const stats::Ecdf f(samples);
  const double top = f.sorted().back();
  for (int i = 0; i <= 200; ++i) {
    const double v = top * i / 200.0;
    w.row({num(c.t), num(v), num(cdf(v)), num(f(v))});
  }
  json body;
  body["mu"] = p.mu;
  body["sigma2"] = p.sigma2;
  body["t"] = c.t;
  body["paths"] = samples.size();
  body["substeps"] = c.substeps;
  body["ks"] = to_json(ks);
  body["sample_mean"] = stats::mean(samples);
  x.json_file("rbm_selftest.json", body);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                         int threads) {
  std::filesystem::create_directories(out_dir);
  Ctx x{config, out_dir, threads, {}};
  std::cerr << "symq: running " << to_string(config.experiment) << "\n";
  switch (config.experiment) {
    case ExperimentKind::stationary: run_stationary(x); break;
    case ExperimentKind::insensitivity: run_insensitivity(x); break;
    case ExperimentKind::transient_marginal: run_transient(x); break;
    case ExperimentKind::diffusion_scale: run_paths(x, scaling::TimeScale::diffusion, "diffusion"); break;
    case ExperimentKind::heavy_tail_scale: run_heavy_tail(x); break;
    case ExperimentKind::collapse: run_collapse(x); break;
    case ExperimentKind::rbm_compare: run_rbm_compare(x); break;
    case ExperimentKind::cycle_tails: run_cycle_tails(x); break;
    case ExperimentKind::rbm_selftest: run_rbm_selftest(x); break;
  }
  for (const auto& f : x.result.files) std::cerr << "symq: wrote " << f.string() << "\n";
  return x.result;
}

}  // namespace symq::cli
