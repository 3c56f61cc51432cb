#include "hjb/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace hjb {

int configure_threads_from_env() {
  if (const char* value = std::getenv(kThreadsEnvVar)) {
    try {
      const int n = std::stoi(value);
      if (n > 0) omp_set_num_threads(n);
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
  return max_threads();
}

int max_threads() noexcept { return omp_get_max_threads(); }

}  // namespace hjb
