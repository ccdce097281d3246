#include "qlfit/kernels/nll_kernel.hpp"

#include <stdexcept>

namespace qlfit::kernels {

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

NllBatchFn select_nll_kernel(KernelChoice choice) {
  switch (choice) {
    case KernelChoice::scalar:
      return &nll_batch_scalar;
    case KernelChoice::avx2:
#if defined(__x86_64__) || defined(__i386__)
      if (cpu_supports_avx2()) return &nll_batch_avx2;
#endif
      throw std::runtime_error("avx2 kernel requested but this CPU does not support AVX2+FMA");
    case KernelChoice::auto_select:
#if defined(__x86_64__) || defined(__i386__)
      if (cpu_supports_avx2()) return &nll_batch_avx2;
#endif
      return &nll_batch_scalar;
  }
  return &nll_batch_scalar;
}

const char* kernel_name(NllBatchFn fn) {
#if defined(__x86_64__) || defined(__i386__)
  if (fn == &nll_batch_avx2) return "avx2";
#endif
  return fn == &nll_batch_scalar ? "scalar" : "unknown";
}

}  // namespace qlfit::kernels
