#include "symq/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace symq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string at_time(double t) { return " at t=" + std::to_string(t); }

// Poisson arrivals with sampled works.
class PoissonSource {
 public:
  PoissonSource(const Discipline& d, const ServiceDistribution& sd, double lambda, Rng& rng)
      : d_(d), sd_(sd), mean_gap_(1.0 / lambda), rng_(rng), next_(rng.exponential(mean_gap_)) {}

  double next_time() const { return next_; }

  // Returns (work, position) for the arrival at next_time() and schedules the next.
  std::pair<double, std::size_t> pop(std::size_t n_before) {
    const double work = sd_.sample(rng_);
    const std::size_t pos = d_.insertion_position(n_before, rng_.uniform());
    next_ += rng_.exponential(mean_gap_);
    return {work, pos};
  }

 private:
  const Discipline& d_;
  const ServiceDistribution& sd_;
  double mean_gap_;
  Rng& rng_;
  double next_;
};

class TraceSource {
 public:
  TraceSource(const Discipline& d, std::span<const Arrival> arrivals, Rng& rng)
      : d_(d), arrivals_(arrivals), rng_(rng) {}

  double next_time() const { return idx_ < arrivals_.size() ? arrivals_[idx_].time : kInf; }

  std::pair<double, std::size_t> pop(std::size_t n_before) {
    const double work = arrivals_[idx_++].work;
    return {work, d_.insertion_position(n_before, rng_.uniform())};
  }

 private:
  const Discipline& d_;
  std::span<const Arrival> arrivals_;
  Rng& rng_;
  std::size_t idx_ = 0;
};

void check_grid(std::span<const double> grid, double horizon) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0) || (k > 0 && !(grid[k] > grid[k - 1]))) {
      throw std::invalid_argument("observation grid must be nonnegative and strictly increasing");
    }
  }
  if (!grid.empty() && grid.back() > horizon) {
    throw std::invalid_argument("observation grid extends past the horizon");
  }
}

template <class Source>
SamplePath run(const Discipline& d, Source& source, double horizon, std::span<const double> grid,
               const SimulationOptions& opt) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  check_grid(grid, horizon);

  SamplePath path;
  path.times.assign(grid.begin(), grid.end());
  path.queue_length.reserve(grid.size());
  if (opt.record_workload) path.workload.reserve(grid.size());

  QueueState& s = path.final_state;
  std::vector<double> rates;
  std::size_t g = 0;
  // Event epochs are kept in extended precision: at large t a double clock
  // loses more than the residual arithmetic does.
  long double clock = 0.0L;

  // Grid points strictly before t see the current (pre-event) state.
  auto record_until = [&](long double t, bool inclusive) {
    while (g < grid.size() && (grid[g] < t || (inclusive && grid[g] == t))) {
      path.queue_length.push_back(s.size());
      if (opt.record_workload) {
        const long double w = s.empty() ? 0.0L : s.workload() - (grid[g] - clock);
        path.workload.push_back(static_cast<double>(std::max(0.0L, w)));
      }
      ++g;
    }
  };
  auto emit = [&](const Event& e) {
    ++path.event_count;
    if (path.event_count > opt.max_events) {
      throw SimulationError("event cap of " + std::to_string(opt.max_events) + " exceeded" +
                            at_time(e.time));
    }
    if (opt.record_events) path.events.push_back(e);
    if (opt.observer) opt.observer(e, s);
  };

  while (true) {
    long double t_dep = kInf;
    Race race{0, kInf};
    if (!s.empty()) {
      d.rates_into(s.size(), rates);
      race = next_departure(s.residuals, rates);
      t_dep = clock + race.delta_t;
    }
    const long double t_arr = source.next_time();
    const long double t_next = std::min(t_dep, t_arr);
    if (t_next > horizon) break;

    record_until(t_next, false);
    // Departures win ties with arrivals.
    if (t_dep <= t_arr) {
      advance(s, race.delta_t, rates);
      clock = t_dep;
      s.time = static_cast<double>(clock);
      s.depart(race.position);
      emit({s.time, EventKind::departure, race.position, s.size(), 0.0});
    } else {
      if (!s.empty()) advance(s, static_cast<double>(t_arr - clock), rates);
      clock = t_arr;
      s.time = static_cast<double>(clock);
      const auto [work, pos] = source.pop(s.size());
      s.arrive(work, pos);
      emit({s.time, EventKind::arrival, pos, s.size(), work});
    }
  }

  record_until(horizon, true);
  if (!s.empty()) advance(s, static_cast<double>(horizon - clock), rates);
  s.time = horizon;
  return path;
}

}  // namespace

double QueueState::workload() const {
  return std::accumulate(residuals.begin(), residuals.end(), 0.0);
}

void QueueState::arrive(double work, std::size_t pos) {
  if (pos < 1 || pos > residuals.size() + 1) {
    throw std::out_of_range("arrive: position " + std::to_string(pos) + " outside 1.." +
                            std::to_string(residuals.size() + 1));
  }
  if (!(work > 0.0)) throw std::invalid_argument("arrive: work must be positive");
  residuals.insert(residuals.begin() + static_cast<std::ptrdiff_t>(pos - 1), work);
}

void QueueState::depart(std::size_t pos) {
  if (pos < 1 || pos > residuals.size()) {
    throw std::out_of_range("depart: position " + std::to_string(pos) + " outside 1.." +
                            std::to_string(residuals.size()));
  }
  residuals.erase(residuals.begin() + static_cast<std::ptrdiff_t>(pos - 1));
}

Race next_departure(std::span<const double> residuals, std::span<const double> rates) {
  if (residuals.empty()) throw SimulationError("next_departure on an empty queue");
  Race best{0, kInf};
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (rates[i] <= 0.0) continue;
    const double dt = residuals[i] / rates[i];
    if (dt < best.delta_t) best = {i + 1, dt};
  }
  if (best.position == 0) throw SimulationError("no position has a positive service rate");
  return best;
}

Race next_departure(const QueueState& s, const Discipline& d) {
  if (s.empty()) throw SimulationError("next_departure on an empty queue");
  return next_departure(s.residuals, d.rates(s.size()));
}

void advance(QueueState& s, double dt, std::span<const double> rates) {
  if (!(dt >= 0.0)) throw std::invalid_argument("advance: dt must be >= 0");
  if (dt == 0.0) return;
  auto& w = s.residuals;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (rates[i] <= 0.0) continue;
    const double before = w[i];
    w[i] -= rates[i] * dt;
    if (w[i] <= kResidualZero) {
      if (w[i] < -kResidualZero * (1.0 + before)) {
        throw SimulationError("advance past the departure race: residual at position " +
                              std::to_string(i + 1) + " would be " + std::to_string(w[i]));
      }
      w[i] = 0.0;
    }
  }
  s.time += dt;
}

void advance(QueueState& s, double dt, const Discipline& d) {
  if (s.empty()) {
    if (dt < 0.0) throw std::invalid_argument("advance: dt must be >= 0");
    s.time += dt;
    return;
  }
  advance(s, dt, d.rates(s.size()));
}

SamplePath simulate(const Discipline& d, const ServiceDistribution& sd, double lambda,
                    double horizon, std::span<const double> grid, Rng& rng,
                    const SimulationOptions& options) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("simulate: lambda must be positive");
  }
  PoissonSource source(d, sd, lambda, rng);
  return run(d, source, horizon, grid, options);
}

SamplePath simulate_trace(const Discipline& d, std::span<const Arrival> arrivals, double horizon,
                          std::span<const double> grid, Rng& insertion_rng,
                          const SimulationOptions& options) {
  for (std::size_t k = 1; k < arrivals.size(); ++k) {
    if (arrivals[k].time < arrivals[k - 1].time) {
      throw std::invalid_argument("simulate_trace: arrivals must be time-sorted");
    }
  }
  TraceSource source(d, arrivals, insertion_rng);
  return run(d, source, horizon, grid, options);
}

double CycleStats::time_at_least(std::size_t k) const {
  double t = 0.0;
  for (std::size_t j = k; j < level_time.size(); ++j) t += level_time[j];
  return t;
}

void for_each_cycle(const Discipline& d, const ServiceDistribution& sd, double lambda,
                    std::size_t n_cycles, Rng& rng, const std::function<void(CycleStats&&)>& visit,
                    std::uint64_t max_events) {
  if (!(lambda > 0.0)) throw std::invalid_argument("busy_cycles: lambda must be positive");
  const double rho = lambda * sd.mean();
  if (!(rho < 1.0)) {
    throw UnsupportedRegime("busy cycles need a stable queue; rho = " + std::to_string(rho));
  }

  PoissonSource source(d, sd, lambda, rng);
  QueueState s;
  s.time = source.next_time();
  std::vector<double> rates;
  std::uint64_t events = 0;

  for (std::size_t c = 0; c < n_cycles; ++c) {
    CycleStats cs;
    const double start = s.time;
    {
      const auto [work, pos] = source.pop(0);
      s.arrive(work, pos);
    }
    cs.max_q = 1;
    cs.level_time.assign(2, 0.0);

    while (!s.empty()) {
      if (++events > max_events) {
        throw SimulationError("event cap of " + std::to_string(max_events) + " exceeded" +
                              at_time(s.time));
      }
      const std::size_t n = s.size();
      d.rates_into(n, rates);
      const Race race = next_departure(s.residuals, rates);
      const double t_dep = s.time + race.delta_t;
      const double t_arr = source.next_time();
      if (t_dep <= t_arr) {
        cs.level_time[n] += race.delta_t;
        cs.busy_length += race.delta_t;
        cs.area += static_cast<double>(n) * race.delta_t;
        advance(s, race.delta_t, rates);
        s.time = t_dep;
        s.depart(race.position);
        ++cs.customers_served;
      } else {
        const double dt = t_arr - s.time;
        cs.level_time[n] += dt;
        cs.busy_length += dt;
        cs.area += static_cast<double>(n) * dt;
        advance(s, dt, rates);
        s.time = t_arr;
        const auto [work, pos] = source.pop(n);
        s.arrive(work, pos);
        if (n + 1 > cs.max_q) {
          cs.max_q = n + 1;
          cs.level_time.resize(cs.max_q + 1, 0.0);
        }
      }
    }
    const double next_start = source.next_time();
    cs.level_time[0] = next_start - s.time;
    cs.cycle_length = next_start - start;
    s.time = next_start;
    visit(std::move(cs));
  }
}

std::vector<CycleStats> busy_cycles(const Discipline& d, const ServiceDistribution& sd,
                                    double lambda, std::size_t n_cycles, Rng& rng,
                                    std::uint64_t max_events) {
  if (n_cycles < 1) throw std::invalid_argument("busy_cycles: n_cycles must be >= 1");
  std::vector<CycleStats> out;
  out.reserve(n_cycles);
  for_each_cycle(
      d, sd, lambda, n_cycles, rng, [&](CycleStats&& c) { out.push_back(std::move(c)); },
      max_events);
  return out;
}

}  // namespace symq
