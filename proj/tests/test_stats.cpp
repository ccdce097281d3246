#include <doctest.h>

#include <cmath>

#include "qlfit/fit.hpp"
#include "qlfit/stats.hpp"

using namespace qlfit;

namespace {

// Brute-force binomial-tail bisection, independent of the beta-quantile
// route the implementation takes. Tail sums use log-space terms.
double log_binom_pmf(int64_t k, int64_t n, double p) {
  if (p <= 0.0) return k == 0 ? 0.0 : -INFINITY;
  if (p >= 1.0) return k == n ? 0.0 : -INFINITY;
  return std::lgamma(static_cast<double>(n + 1)) -
         std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1)) +
         static_cast<double>(k) * std::log(p) +
         static_cast<double>(n - k) * std::log1p(-p);
}

double upper_tail(int64_t k, int64_t n, double p) {  // P[X >= k]
  double sum = 0.0;
  for (int64_t j = k; j <= n; ++j) sum += std::exp(log_binom_pmf(j, n, p));
  return std::min(sum, 1.0);
}

double lower_tail(int64_t k, int64_t n, double p) {  // P[X <= k]
  double sum = 0.0;
  for (int64_t j = 0; j <= k; ++j) sum += std::exp(log_binom_pmf(j, n, p));
  return std::min(sum, 1.0);
}

std::pair<double, double> oracle_clopper_pearson(int64_t k, int64_t n, double conf) {
  const double alpha = 1.0 - conf;
  double low = 0.0, high = 1.0;
  if (k > 0) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {  // P[X >= k] increasing in p
      const double mid = 0.5 * (lo + hi);
      (upper_tail(k, n, mid) < alpha / 2 ? lo : hi) = mid;
    }
    low = 0.5 * (lo + hi);
  }
  if (k < n) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {  // P[X <= k] decreasing in p
      const double mid = 0.5 * (lo + hi);
      (lower_tail(k, n, mid) > alpha / 2 ? lo : hi) = mid;
    }
    high = 0.5 * (lo + hi);
  }
  return {low, high};
}

FitResult fake_fit(ModelKind model, double nll, int64_t n_obs) {
  FitResult fit;
  fit.model = model;
  fit.nll = nll;
  fit.n_obs = n_obs;
  fit.n_params = model_param_count(model);
  if (model != ModelKind::random) fit.best_params = ModelParams{};
  return fit;
}

}  // namespace

TEST_CASE("chi-square quantiles reproduce the quoted critical values") {
  CHECK(chi_square_quantile(0.95, 2) == doctest::Approx(5.991).epsilon(2e-4));
  CHECK(chi_square_quantile(0.95, 3) == doctest::Approx(7.815).epsilon(2e-4));
  CHECK(chi_square_quantile(0.95, 1) == doctest::Approx(3.841).epsilon(2e-4));
}

TEST_CASE("chi-square quantile round-trips through the CDF") {
  for (const double p : {0.5, 0.95, 0.99})
    for (const int dof : {1, 2, 3})
      CHECK(chi_square_cdf(chi_square_quantile(p, dof), dof) ==
            doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("bic follows k ln n + 2 nll") {
  CHECK(bic(7.5, 0, 12) == doctest::Approx(15.0));
  CHECK(bic(10.0, 2, 30) == doctest::Approx(2.0 * std::log(30.0) + 20.0).epsilon(1e-12));
  // equal k and n: the BIC order is the NLL order
  CHECK(bic(5.0, 2, 30) < bic(6.0, 2, 30));
  CHECK_THROWS(bic(1.0, 2, 0));
}

TEST_CASE("likelihood ratio test matches the quoted setups") {
  const auto random_fit = fake_fit(ModelKind::random, 100.0, 40);
  const auto myopic_fit = fake_fit(ModelKind::myopic, 90.0, 40);
  const auto full_fit = fake_fit(ModelKind::full_rl, 89.5, 40);

  const auto mr = likelihood_ratio_test(random_fit, myopic_fit, 0.95);
  CHECK(mr.dof == 2);
  CHECK(mr.critical_value == doctest::Approx(5.991).epsilon(2e-4));
  CHECK(mr.lrt_statistic == doctest::Approx(20.0));
  CHECK(mr.significant);

  const auto fr = likelihood_ratio_test(random_fit, full_fit, 0.95);
  CHECK(fr.dof == 3);
  CHECK(fr.critical_value == doctest::Approx(7.815).epsilon(2e-4));

  const auto fm = likelihood_ratio_test(myopic_fit, full_fit, 0.95);
  CHECK(fm.dof == 1);
  CHECK(fm.critical_value == doctest::Approx(3.841).epsilon(2e-4));
  CHECK(!fm.significant);

  // identical NLLs: statistic 0, p-value 1, not significant
  const auto same = likelihood_ratio_test(fake_fit(ModelKind::random, 50.0, 10),
                                          fake_fit(ModelKind::myopic, 50.0, 10), 0.95);
  CHECK(same.lrt_statistic == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));
  CHECK(!same.significant);

  // a slightly "worse" fuller model clips to zero instead of going negative
  const auto clipped = likelihood_ratio_test(
      fake_fit(ModelKind::random, 50.0, 10),
      fake_fit(ModelKind::myopic, 50.0 + 1e-12, 10), 0.95);
  CHECK(clipped.lrt_statistic == 0.0);

  CHECK_THROWS(likelihood_ratio_test(myopic_fit, random_fit, 0.95));
  CHECK_THROWS(likelihood_ratio_test(fake_fit(ModelKind::random, 10.0, 5),
                                     fake_fit(ModelKind::myopic, 9.0, 6), 0.95));
}

TEST_CASE("lrt statistic ignores a common NLL offset") {
  const double offset = 123.456;
  const auto a = likelihood_ratio_test(fake_fit(ModelKind::random, 80.0, 20),
                                       fake_fit(ModelKind::myopic, 77.0, 20), 0.95);
  const auto b =
      likelihood_ratio_test(fake_fit(ModelKind::random, 80.0 + offset, 20),
                            fake_fit(ModelKind::myopic, 77.0 + offset, 20), 0.95);
  CHECK(a.lrt_statistic == doctest::Approx(b.lrt_statistic).epsilon(1e-12));
}

TEST_CASE("clopper-pearson boundary cases") {
  const auto all = clopper_pearson(10, 10, 0.95);
  CHECK(all.high == 1.0);
  const auto none = clopper_pearson(0, 10, 0.95);
  CHECK(none.low == 0.0);
  // (1-p)^10 = 0.025  =>  p ~ 0.3085
  CHECK(none.high == doctest::Approx(1.0 - std::pow(0.025, 0.1)).epsilon(1e-10));
  CHECK(none.high == doctest::Approx(0.3085).epsilon(1e-3));
  CHECK_THROWS(clopper_pearson(11, 10, 0.95));
  CHECK_THROWS(clopper_pearson(5, 0, 0.95));
  CHECK_THROWS(clopper_pearson(5, 10, 1.5));
}

TEST_CASE("clopper-pearson matches the bisection oracle") {
  const std::pair<int64_t, int64_t> cases[] = {{0, 10}, {7, 46}, {46, 46},
                                               {1, 3},  {15, 30}, {499, 500}};
  for (const auto& [k, n] : cases) {
    for (const double conf : {0.95, 0.99}) {
      const auto got = clopper_pearson(k, n, conf);
      const auto [low, high] = oracle_clopper_pearson(k, n, conf);
      CHECK(std::abs(got.low - low) <= 1e-6);
      CHECK(std::abs(got.high - high) <= 1e-6);
      CHECK(got.low <= static_cast<double>(k) / static_cast<double>(n));
      CHECK(got.high >= static_cast<double>(k) / static_cast<double>(n));
    }
  }
}

TEST_CASE("clopper-pearson intervals nest across confidence levels") {
  for (int64_t k : {0ll, 3ll, 7ll, 23ll, 46ll}) {
    const auto narrow = clopper_pearson(k, 46, 0.95);
    const auto wide = clopper_pearson(k, 46, 0.99);
    CHECK(wide.low <= narrow.low + 1e-15);
    CHECK(wide.high >= narrow.high - 1e-15);
  }
}

TEST_CASE("population verdict reproduces the 7-of-46 negative result") {
  std::vector<ComparisonResult> comparisons(46);
  for (int i = 0; i < 7; ++i) comparisons[static_cast<size_t>(i)].significant = true;
  const auto verdict = population_verdict(comparisons, 0.99, 0.5);
  CHECK(verdict.stat.successes == 7);
  CHECK(!verdict.positive);
  CHECK(verdict.stat.high < 0.5);  // the whole interval sits below chance

  for (auto& c : comparisons) c.significant = true;
  const auto positive = population_verdict(comparisons, 0.99, 0.5);
  CHECK(positive.positive);

  for (auto& c : comparisons) c.significant = false;
  const auto zero = population_verdict(comparisons, 0.99, 0.5);
  CHECK(zero.stat.low == 0.0);
  CHECK(!zero.positive);
}
