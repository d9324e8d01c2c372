#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#include <omp.h>

#include "symq/rng.hpp"

namespace symq::parallel {

// Thread count used when a caller passes 0: SYMQ_THREADS, else the OpenMP default.
int default_threads();

/// Serial reference: result[i] = fn(i, Rng(seed, {stream, i})).
template <class Result, class Fn>
std::vector<Result> replicate_serial(std::size_t n, std::uint64_t seed, std::uint64_t stream,
                                     Fn&& fn) {
  std::vector<Result> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, {stream, static_cast<std::uint64_t>(i)});
    out[i] = fn(i, rng);
  }
  return out;
}

/// OpenMP kernel with the same contract as replicate_serial. Each index writes
/// only its own slot, so the merged vector is identical for any thread count.
template <class Result, class Fn>
std::vector<Result> replicate(std::size_t n, std::uint64_t seed, std::uint64_t stream, Fn&& fn,
                              int threads = 0) {
  if (threads <= 0) threads = default_threads();
  if (threads == 1) return replicate_serial<Result>(n, seed, stream, fn);

  std::vector<Result> out(n);
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      Rng rng(seed, {stream, static_cast<std::uint64_t>(i)});
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i), rng);
    } catch (...) {
#pragma omp critical(symq_replicate_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace symq::parallel
