#pragma once

#include <functional>
#include <string>
#include <vector>

namespace qlfit {

struct Box {
  std::vector<double> lo, hi;
};

// Evaluates the objective at a batch of points: out[i] = f(points[i]).
// Points are packed row-major, `dim` doubles each. Batching exists so the
// NLL kernel can run finite-difference stencils and line-search trials as
// one SIMD pass.
using BatchObjective =
    std::function<void(const double* points, size_t n_points, size_t dim, double* out)>;

struct MinimizeOptions {
  int max_iterations = 500;
  double grad_tol = 1e-6;    // on the inf-norm of the projected gradient step
  double step_tol = 1e-9;    // on the inf-norm of the accepted step
  double fd_step_rel = 5e-4; // central-difference step, relative
  int nonmonotone_window = 10;
  double armijo_c = 1e-4;
  double bb_step_min = 1e-10;
  double bb_step_max = 1e10;
};

struct MinimizeResult {
  std::vector<double> x;  // best point seen (in the box)
  double f = 0.0;
  int iterations = 0;
  size_t n_evaluations = 0;
  bool converged = false;
  std::string status;
};

// Deterministic bounded local minimizer: projected gradient with
// Barzilai-Borwein steps, nonmonotone Armijo backtracking, and central
// finite-difference gradients (one-sided at the box edges). Stops on
// projected-gradient norm, step size, or the iteration cap; reports the
// best point encountered. Non-finite objective values are treated as
// rejections; a non-finite start is a failure.
MinimizeResult minimize_bounded(const BatchObjective& objective,
                                std::vector<double> x0, const Box& box,
                                const MinimizeOptions& options = {});

}  // namespace qlfit
