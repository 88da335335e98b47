#pragma once

namespace bandspike {

// When the LAPACK self-test fails and OPENBLAS_CORETYPE is unset, re-executes
// the current process with OPENBLAS_CORETYPE=Haswell so that a dynamic-arch
// OpenBLAS skips its misdetected kernels. Returns normally otherwise (and when
// the re-exec is impossible); the Eigen fallback then stays in effect.
void pin_blas_kernel(char** argv);

}  // namespace bandspike
