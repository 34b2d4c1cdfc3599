#include "ergolab/common.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace ergolab {

namespace {

int override_workers = 0;

}  // namespace

int worker_count() {
  if (override_workers > 0) return override_workers;
  if (const char* env = std::getenv("ERGOLAB_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

void set_worker_count(int workers) { override_workers = workers > 0 ? workers : 0; }

}  // namespace ergolab
