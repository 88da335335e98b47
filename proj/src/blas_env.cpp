#include "bandspike/blas_env.hpp"

#include <cstdlib>

#include <unistd.h>

#include "bandspike/spectra.hpp"

namespace bandspike {

void pin_blas_kernel(char** argv) {
#if defined(__x86_64__) && defined(__linux__)
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
  if (eigen_backend() == EigenBackend::Lapack) return;
  setenv("OPENBLAS_CORETYPE", "Haswell", 1);
  execv("/proc/self/exe", argv);
#else
  (void)argv;
#endif
}

}  // namespace bandspike
