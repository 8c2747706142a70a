#include "lsqswarm/kernels.hpp"

namespace lsqswarm::kernels {

const KernelTable* detail_avx2_table();
const KernelTable* detail_neon_table();

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* resolve() {
  if (const KernelTable* t = avx2_kernels()) return t;
  if (const KernelTable* t = neon_kernels()) return t;
  return &scalar_kernels();
}

}  // namespace

const KernelTable* avx2_kernels() {
  const KernelTable* t = detail_avx2_table();
  return (t && cpu_has_avx2_fma()) ? t : nullptr;
}

const KernelTable* neon_kernels() { return detail_neon_table(); }

const KernelTable& active_kernels() {
  static const KernelTable* table = resolve();
  return *table;
}

}  // namespace lsqswarm::kernels
