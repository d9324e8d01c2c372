#include "symq/rng.hpp"

#include <cmath>
#include <vector>

namespace symq {

namespace {

std::mt19937_64 seeded(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * path.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  // Length tag keeps (s) and (s, 0) distinct.
  words.push_back(static_cast<std::uint32_t>(path.size()));
  for (auto p : path) push(p);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seeded(seed, {})) {}

Rng::Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream_path)
    : engine_(seeded(seed, stream_path)) {}

double Rng::exponential(double mean) { return -mean * std::log(uniform_pos()); }

}  // namespace symq
