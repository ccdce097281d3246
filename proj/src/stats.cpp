#include "qlfit/stats.hpp"

#include <cmath>
#include <stdexcept>

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_errno.h>

namespace qlfit {

namespace {

// GSL must not abort the process; arguments are validated here instead.
const bool g_handler_off = [] {
  gsl_set_error_handler_off();
  return true;
}();

void check_dof(int dof) {
  if (dof < 1) throw std::invalid_argument("chi-square: dof must be >= 1");
}

}  // namespace

double chi_square_cdf(double x, int dof) {
  check_dof(dof);
  if (x <= 0.0) return 0.0;
  return gsl_cdf_chisq_P(x, dof);
}

double chi_square_quantile(double p, int dof) {
  check_dof(dof);
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("chi-square quantile: p must be in (0,1)");
  return gsl_cdf_chisq_Pinv(p, dof);
}

double chi_square_sf(double x, int dof) {
  check_dof(dof);
  if (x <= 0.0) return 1.0;
  return gsl_cdf_chisq_Q(x, dof);
}

double bic(double nll, int n_params, int64_t n_obs) {
  if (n_obs < 1) throw std::invalid_argument("bic: n_obs must be >= 1");
  if (n_params < 0) throw std::invalid_argument("bic: n_params must be >= 0");
  return static_cast<double>(n_params) * std::log(static_cast<double>(n_obs)) +
         2.0 * nll;
}

PopulationStat clopper_pearson(int64_t successes, int64_t trials, double confidence) {
  if (trials < 1) throw std::invalid_argument("clopper_pearson: trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("clopper_pearson: successes out of range");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("clopper_pearson: confidence must be in (0,1)");

  const double alpha = 1.0 - confidence;
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);

  PopulationStat stat;
  stat.successes = successes;
  stat.trials = trials;
  stat.confidence = confidence;
  stat.low = successes == 0 ? 0.0 : gsl_cdf_beta_Pinv(alpha / 2.0, k, n - k + 1.0);
  stat.high = successes == trials ? 1.0 : gsl_cdf_beta_Pinv(1.0 - alpha / 2.0, k + 1.0, n - k);
  return stat;
}

}  // namespace qlfit
