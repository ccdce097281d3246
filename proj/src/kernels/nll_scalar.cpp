#include "qlfit/kernels/nll_kernel.hpp"

#include <limits>

namespace qlfit::kernels {

double nll_point_scalar(const SellTrace& trace, const ParamPoint& params) {
  double q[2][3] = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  double nll = 0.0;
  const size_t n = trace.size();
  for (size_t t = 0; t < n; ++t) {
    const int s = trace.state_before[t];
    const int a = trace.action[t];
    const int s_next = trace.state_after[t];

    const double p = softmax_prob(q[s], a, params.beta);
    nll -= std::log(p);

    const double* next_row = q[s_next];
    const double next_best = std::max(next_row[0], std::max(next_row[1], next_row[2]));
    const double td_error = trace.reward[t] + params.gamma * next_best - q[s][a];
    q[s][a] += params.alpha * td_error;
  }
  if (!std::isfinite(nll)) return std::numeric_limits<double>::infinity();
  return nll;
}

void nll_batch_scalar(const SellTrace& trace, const ParamPoint* points, size_t n,
                      double* out) {
  for (size_t i = 0; i < n; ++i) out[i] = nll_point_scalar(trace, points[i]);
}

}  // namespace qlfit::kernels
