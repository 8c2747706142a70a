#pragma once

#include <cstddef>

namespace lsqswarm::kernels {

// Function table for the arithmetic inner loops. One scalar reference
// implementation plus optional SIMD lanes; all lanes are interchangeable
// and equivalence-tested against the scalar one.
struct KernelTable {
  const char* name;
  // sum_i x[i]*y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a*x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out = x + a*y  (out may alias x)
  void (*add_scaled)(const double* x, double a, const double* y, double* out,
                     std::size_t n);
  // out = A*x with A row-major (rows x cols); out must not alias x
  void (*matvec)(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* out);
  // out = A^T*x with A row-major (rows x cols); out must not alias x
  void (*matvec_t)(const double* a, std::size_t rows, std::size_t cols,
                   const double* x, double* out);
  // out = s + h/6*(k1 + 2*k2 + 2*k3 + k4); classical RK4 recombination
  void (*rk4_combine)(const double* s, const double* k1, const double* k2,
                      const double* k3, const double* k4, double h, double* out,
                      std::size_t n);
};

const KernelTable& scalar_kernels();

// Null when the lane is not compiled in or the CPU lacks the feature.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Best available lane, resolved once at first use.
const KernelTable& active_kernels();

}  // namespace lsqswarm::kernels
