#include "lsqswarm/kernels.hpp"

namespace lsqswarm::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_scaled_scalar(const double* x, double a, const double* y, double* out,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
}

void matvec_scalar(const double* a, std::size_t rows, std::size_t cols,
                   const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r)
    out[r] = dot_scalar(a + r * cols, x, cols);
}

void matvec_t_scalar(const double* a, std::size_t rows, std::size_t cols,
                     const double* x, double* out) {
  for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(x[r], a + r * cols, out, cols);
}

void rk4_combine_scalar(const double* s, const double* k1, const double* k2,
                        const double* k3, const double* k4, double h, double* out,
                        std::size_t n) {
  const double w = h / 6.0;
  for (std::size_t i = 0; i < n; ++i)
    out[i] = s[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

constexpr KernelTable kScalarTable = {
    "scalar",        dot_scalar,      axpy_scalar,       add_scaled_scalar,
    matvec_scalar,   matvec_t_scalar, rk4_combine_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalarTable; }

}  // namespace lsqswarm::kernels
