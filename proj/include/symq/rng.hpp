#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace symq {

/// Seeded random stream. Every replication owns one; streams are derived
/// from (master seed, index path) so results never depend on thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream_path);

  std::uint64_t next() { return engine_(); }

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // (0, 1]
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential(double mean);
  double normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace symq
