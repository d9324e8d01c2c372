#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "symq/discipline.hpp"
#include "symq/rng.hpp"
#include "symq/service_dist.hpp"

namespace symq {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact simulation state: residual works by position (position 1 first).
/// Residuals stay positive between events; one that reaches zero departs.
struct QueueState {
  std::vector<double> residuals;
  double time = 0.0;

  std::size_t size() const { return residuals.size(); }
  bool empty() const { return residuals.empty(); }
  double workload() const;

  /// Inserts at pos (1..n+1); occupants of positions >= pos shift up.
  void arrive(double work, std::size_t pos);
  /// Removes pos (1..n); higher positions shift down.
  void depart(std::size_t pos);
};

// Residuals at or below this after service count as finished.
inline constexpr double kResidualZero = 1e-12;

struct Race {
  std::size_t position;  // 1-indexed
  double delta_t;
};

/// First position to empty at the current rates. Only positions with a
/// positive rate compete; ties go to the lowest position.
Race next_departure(const QueueState& s, const Discipline& d);
Race next_departure(std::span<const double> residuals, std::span<const double> rates);

/// Serves every position at its rate for dt (0 <= dt <= race bound) and
/// advances the clock. Total work drops by exactly dt.
void advance(QueueState& s, double dt, const Discipline& d);
void advance(QueueState& s, double dt, std::span<const double> rates);

enum class EventKind { arrival, departure };

struct Event {
  double time;
  EventKind kind;
  std::size_t position;
  std::size_t queue_length;  // after the event
  double work;               // arriving work; 0 for departures
};

struct Arrival {
  double time;
  double work;
};

struct SimulationOptions {
  std::uint64_t max_events = 10'000'000'000ULL;
  bool record_workload = false;
  bool record_events = false;
  // Called after every event with the post-event state.
  std::function<void(const Event&, const QueueState&)> observer;
};

/// Queue length (and optionally total work) at the observation grid, sampled
/// right-continuously: an event at a grid time is counted.
struct SamplePath {
  std::vector<double> times;
  std::vector<std::size_t> queue_length;
  std::vector<double> workload;  // filled when record_workload
  std::uint64_t event_count = 0;
  QueueState final_state;
  std::vector<Event> events;  // filled when record_events
};

/// Poisson(lambda) arrivals from an empty queue on [0, horizon]. At each
/// arrival the work and then the insertion uniform are drawn from rng.
SamplePath simulate(const Discipline& d, const ServiceDistribution& sd, double lambda,
                    double horizon, std::span<const double> grid, Rng& rng,
                    const SimulationOptions& options = {});

/// Same event loop driven by a fixed arrival sequence (time-sorted); only
/// insertion positions are random.
SamplePath simulate_trace(const Discipline& d, std::span<const Arrival> arrivals, double horizon,
                          std::span<const double> grid, Rng& insertion_rng,
                          const SimulationOptions& options = {});

/// One regeneration cycle: from an arrival to an empty system until the next
/// such arrival (busy period plus the idle period that follows).
struct CycleStats {
  double cycle_length = 0.0;
  double busy_length = 0.0;
  double area = 0.0;  // integral of Q over the cycle
  std::size_t max_q = 0;
  std::uint64_t customers_served = 0;
  std::vector<double> level_time;  // time spent with Q == k, k = 0..max_q

  double time_at_least(std::size_t k) const;
};

/// Simulates exactly n_cycles cycles, handing each to visit as it closes.
void for_each_cycle(const Discipline& d, const ServiceDistribution& sd, double lambda,
                    std::size_t n_cycles, Rng& rng, const std::function<void(CycleStats&&)>& visit,
                    std::uint64_t max_events = 10'000'000'000ULL);

/// Requires rho = lambda * mean < 1.
std::vector<CycleStats> busy_cycles(const Discipline& d, const ServiceDistribution& sd,
                                    double lambda, std::size_t n_cycles, Rng& rng,
                                    std::uint64_t max_events = 10'000'000'000ULL);

}  // namespace symq
