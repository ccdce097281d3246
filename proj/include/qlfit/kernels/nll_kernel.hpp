#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace qlfit::kernels {

// The replayed sell sequence with everything that does not depend on the
// fitted parameters: chosen bin, squashed reward, and the win/loss state
// before and after each sell. Rewards and states depend only on the
// transactions (and the fixed squash scale), so one trace serves every
// parameter vector the optimizer visits.
struct SellTrace {
  std::vector<uint8_t> action;        // risk bin, 0..2
  std::vector<uint8_t> state_before;  // 0 = loss, 1 = win
  std::vector<uint8_t> state_after;
  std::vector<double> reward;         // squashed, in (-1, 1)

  size_t size() const { return action.size(); }
};

struct ParamPoint {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

// One softmax choice probability over a 3-entry Q row, max-shifted so the
// exponents are never positive.
inline double softmax_prob(const double* q_row, int action, double beta) {
  const double m = std::max(q_row[0], std::max(q_row[1], q_row[2]));
  const double e0 = std::exp((q_row[0] - m) * beta);
  const double e1 = std::exp((q_row[1] - m) * beta);
  const double e2 = std::exp((q_row[2] - m) * beta);
  const double chosen = action == 0 ? e0 : action == 1 ? e1 : e2;
  return chosen / (e0 + e1 + e2);
}

// Negative log-likelihood of the trace under one parameter vector.
// Non-finite accumulations (divergent Q dynamics at extreme alpha/gamma)
// come back as +inf so the optimizer can reject the point.
double nll_point_scalar(const SellTrace& trace, const ParamPoint& params);

// out[i] = nll(points[i]). The scalar variant is the reference; the AVX2
// variant processes four parameter vectors per pass and must agree with the
// reference to tight relative tolerance (equivalence-tested).
void nll_batch_scalar(const SellTrace& trace, const ParamPoint* points, size_t n,
                      double* out);
#if defined(__x86_64__) || defined(__i386__)
void nll_batch_avx2(const SellTrace& trace, const ParamPoint* points, size_t n,
                    double* out);
#endif

enum class KernelChoice { auto_select, scalar, avx2 };

using NllBatchFn = void (*)(const SellTrace&, const ParamPoint*, size_t, double*);

bool cpu_supports_avx2();

// auto_select picks the widest kernel the CPU supports; asking for avx2 on
// hardware without it throws.
NllBatchFn select_nll_kernel(KernelChoice choice);

const char* kernel_name(NllBatchFn fn);

}  // namespace qlfit::kernels
