#pragma once

#include <cstdint>

namespace qlfit {

double chi_square_cdf(double x, int dof);
double chi_square_quantile(double p, int dof);
// Upper tail P[X >= x].
double chi_square_sf(double x, int dof);

// BIC = k ln(n) + 2 * nll; lower is better.
double bic(double nll, int n_params, int64_t n_obs);

struct PopulationStat {
  int64_t successes = 0;
  int64_t trials = 0;
  double confidence = 0.0;
  double low = 0.0;
  double high = 1.0;

  double proportion() const {
    return static_cast<double>(successes) / static_cast<double>(trials);
  }
};

// Exact two-sided binomial interval from beta-quantile tail inversion;
// low = 0 when successes = 0, high = 1 when successes = trials.
PopulationStat clopper_pearson(int64_t successes, int64_t trials, double confidence);

}  // namespace qlfit
