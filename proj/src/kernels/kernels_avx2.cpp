// AVX2+FMA lane. This file is compiled with -mavx2 -mfma on x86-64 targets
// and degrades to a stub elsewhere.
#include "lsqswarm/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace lsqswarm::kernels {
namespace {

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  acc0 = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc0);
  __m128d hi = _mm256_extractf128_pd(acc0, 1);
  lo = _mm_add_pd(lo, hi);
  double acc = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void add_scaled_avx2(const double* x, double a, const double* y, double* out,
                     std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_fmadd_pd(va, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(out + i, v);
  }
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

void matvec_avx2(const double* a, std::size_t rows, std::size_t cols,
                 const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_avx2(a + r * cols, x, cols);
}

void matvec_t_avx2(const double* a, std::size_t rows, std::size_t cols,
                   const double* x, double* out) {
  for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy_avx2(x[r], a + r * cols, out, cols);
}

void rk4_combine_avx2(const double* s, const double* k1, const double* k2,
                      const double* k3, const double* k4, double h, double* out,
                      std::size_t n) {
  const double w = h / 6.0;
  const __m256d vw = _mm256_set1_pd(w);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d sum = _mm256_loadu_pd(k1 + i);
    sum = _mm256_fmadd_pd(two, _mm256_loadu_pd(k2 + i), sum);
    sum = _mm256_fmadd_pd(two, _mm256_loadu_pd(k3 + i), sum);
    sum = _mm256_add_pd(sum, _mm256_loadu_pd(k4 + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vw, sum, _mm256_loadu_pd(s + i)));
  }
  for (; i < n; ++i)
    out[i] = s[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

constexpr KernelTable kAvx2Table = {
    "avx2",        dot_avx2,      axpy_avx2,       add_scaled_avx2,
    matvec_avx2,   matvec_t_avx2, rk4_combine_avx2};

}  // namespace

const KernelTable* detail_avx2_table() { return &kAvx2Table; }

}  // namespace lsqswarm::kernels

#else

namespace lsqswarm::kernels {
const KernelTable* detail_avx2_table() { return nullptr; }
}  // namespace lsqswarm::kernels

#endif
