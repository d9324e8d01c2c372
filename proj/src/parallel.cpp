#include "symq/replicate.hpp"

#include <cstdlib>
#include <string>

namespace symq::parallel {

int default_threads() {
  if (const char* env = std::getenv("SYMQ_THREADS")) {
    try {
      const int k = std::stoi(env);
      if (k > 0) return k;
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

}  // namespace symq::parallel
