#include "covfam/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace covfam {

int resolve_threads(int requested) {
  if (requested > 0) {
    return requested;
  }
  if (const char* env = std::getenv("COVFAM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) {
        return n;
      }
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

}  // namespace covfam
