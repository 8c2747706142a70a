// NEON lane for aarch64; stub elsewhere.
#include "lsqswarm/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace lsqswarm::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  for (; i + 2 <= n; i += 2)
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void add_scaled_neon(const double* x, double a, const double* y, double* out,
                     std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(x + i), va, vld1q_f64(y + i)));
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

void matvec_neon(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_neon(a + r * cols, x, cols);
}

void matvec_t_neon(const double* a, std::size_t rows, std::size_t cols,
                   const double* x, double* out) {
  for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy_neon(x[r], a + r * cols, out, cols);
}

void rk4_combine_neon(const double* s, const double* k1, const double* k2,
                      const double* k3, const double* k4, double h, double* out,
                      std::size_t n) {
  const double w = h / 6.0;
  const float64x2_t vw = vdupq_n_f64(w);
  const float64x2_t two = vdupq_n_f64(2.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t sum = vld1q_f64(k1 + i);
    sum = vfmaq_f64(sum, two, vld1q_f64(k2 + i));
    sum = vfmaq_f64(sum, two, vld1q_f64(k3 + i));
    sum = vaddq_f64(sum, vld1q_f64(k4 + i));
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(s + i), vw, sum));
  }
  for (; i < n; ++i)
    out[i] = s[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

constexpr KernelTable kNeonTable = {
    "neon",        dot_neon,      axpy_neon,       add_scaled_neon,
    matvec_neon,   matvec_t_neon, rk4_combine_neon};

}  // namespace

const KernelTable* detail_neon_table() { return &kNeonTable; }

}  // namespace lsqswarm::kernels

#else

namespace lsqswarm::kernels {
const KernelTable* detail_neon_table() { return nullptr; }
}  // namespace lsqswarm::kernels

#endif
