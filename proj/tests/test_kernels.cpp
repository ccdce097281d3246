#include <doctest.h>

#include <cmath>

#include "qlfit/kernels/nll_kernel.hpp"
#include "qlfit/model.hpp"
#include "qlfit/rng.hpp"
#include "support/helpers.hpp"

using namespace qlfit;
using namespace qlfit::kernels;

namespace {

SellTrace random_trace(Rng& rng, size_t length) {
  SellTrace trace;
  double profit = 0.0;
  for (size_t t = 0; t < length; ++t) {
    const double reward = std::tanh(rng.uniform(-1.5, 1.5));
    trace.action.push_back(static_cast<uint8_t>(rng.below(3)));
    trace.state_before.push_back(static_cast<uint8_t>(profit < 0 ? 0 : 1));
    profit += reward;
    trace.state_after.push_back(static_cast<uint8_t>(profit < 0 ? 0 : 1));
    trace.reward.push_back(reward);
  }
  return trace;
}

ParamPoint random_params(Rng& rng) {
  return {rng.uniform(1e-4, 2.0), rng.uniform(0.0, 50.0), rng.uniform(0.0, 0.9999)};
}

}  // namespace

TEST_CASE("batch scalar equals pointwise scalar bitwise") {
  Rng rng(61);
  const SellTrace trace = random_trace(rng, 120);
  std::vector<ParamPoint> points;
  for (int i = 0; i < 7; ++i) points.push_back(random_params(rng));
  std::vector<double> batch(points.size());
  nll_batch_scalar(trace, points.data(), points.size(), batch.data());
  for (size_t i = 0; i < points.size(); ++i)
    CHECK(batch[i] == nll_point_scalar(trace, points[i]));
}

TEST_CASE("scalar kernel agrees with the event-level replay") {
  const auto history = testsupport::three_sell_history();
  const auto cls = testsupport::classification_of({{"VOD", 1}});
  Rng rng(67);
  for (int i = 0; i < 20; ++i) {
    const ParamPoint point = random_params(rng);
    const ModelParams params{point.alpha, point.beta, point.gamma, 500.0};
    const auto trace = build_trace(history, cls, params.rho);
    const double via_kernel = nll_point_scalar(trace, point);
    const double via_replay = replay_nll(history, cls, params).nll;
    CHECK(via_kernel == doctest::Approx(via_replay).epsilon(1e-12));
  }
}

TEST_CASE("kernel value at beta=0 is n ln 3") {
  Rng rng(71);
  const SellTrace trace = random_trace(rng, 200);
  const double value = nll_point_scalar(trace, {1.5, 0.0, 0.5});
  CHECK(value == doctest::Approx(200.0 * std::log(3.0)).epsilon(1e-13));
}

TEST_CASE("kernel selection honors explicit choices") {
  CHECK(kernel_name(select_nll_kernel(KernelChoice::scalar)) == std::string("scalar"));
  if (cpu_supports_avx2()) {
    CHECK(kernel_name(select_nll_kernel(KernelChoice::avx2)) == std::string("avx2"));
    CHECK(kernel_name(select_nll_kernel(KernelChoice::auto_select)) == std::string("avx2"));
  } else {
    CHECK_THROWS(select_nll_kernel(KernelChoice::avx2));
    CHECK(kernel_name(select_nll_kernel(KernelChoice::auto_select)) ==
          std::string("scalar"));
  }
}

#if defined(__x86_64__) || defined(__i386__)
TEST_CASE("avx2 kernel is equivalent to the scalar reference") {
  if (!cpu_supports_avx2()) {
    MESSAGE("AVX2 not available; equivalence exercised on another host");
    return;
  }
  Rng rng(73);
  for (int round = 0; round < 40; ++round) {
    const SellTrace trace = random_trace(rng, 1 + rng.below(400));
    std::vector<ParamPoint> points;
    const size_t n = 1 + rng.below(9);  // exercises the padded tail too
    for (size_t i = 0; i < n; ++i) points.push_back(random_params(rng));

    std::vector<double> scalar(n), simd(n);
    nll_batch_scalar(trace, points.data(), n, scalar.data());
    nll_batch_avx2(trace, points.data(), n, simd.data());

    for (size_t i = 0; i < n; ++i) {
      if (std::abs(scalar[i]) <= 1e6) {
        // Ordinary fitting region: a few ulp of exp/log per step.
        CHECK(std::abs(simd[i] - scalar[i]) <=
              1e-10 * std::max(1.0, std::abs(scalar[i])));
      } else {
        // Divergent Q dynamics amplify rounding; both sides must agree the
        // point is hopeless.
        CHECK(std::abs(simd[i]) > 1e5);
      }
    }
  }
}

TEST_CASE("avx2 kernel matches scalar on fitted-parameter magnitudes tightly") {
  if (!cpu_supports_avx2()) return;
  Rng rng(79);
  const SellTrace trace = random_trace(rng, 300);
  const ParamPoint typical[4] = {
      {0.8, 20.0, 0.0}, {0.3, 5.0, 0.5}, {1.2, 40.0, 0.9}, {0.05, 1.0, 0.99}};
  double scalar[4], simd[4];
  nll_batch_scalar(trace, typical, 4, scalar);
  nll_batch_avx2(trace, typical, 4, simd);
  for (int i = 0; i < 4; ++i)
    CHECK(simd[i] == doctest::Approx(scalar[i]).epsilon(1e-12));
}
#endif
