#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "qlfit/risk.hpp"
#include "qlfit/rng.hpp"

using namespace qlfit;

namespace {

PriceSeries series_of(const std::string& stock, const std::vector<double>& prices) {
  PriceSeries s;
  s.stock = stock;
  for (size_t i = 0; i < prices.size(); ++i)
    s.observations.push_back({Date{static_cast<int32_t>(i)}, prices[i]});
  return s;
}

std::vector<ReturnPoint> returns_of(const std::vector<double>& values) {
  std::vector<ReturnPoint> r;
  for (size_t i = 0; i < values.size(); ++i)
    r.push_back({Date{static_cast<int32_t>(i)}, values[i]});
  return r;
}

}  // namespace

TEST_CASE("daily returns are simple returns over consecutive closes") {
  CHECK(daily_returns(series_of("A", {100, 110}))[0].value == doctest::Approx(0.10));
  const auto flat = daily_returns(series_of("A", {5, 5, 5}));
  CHECK(flat.size() == 2);
  CHECK(flat[0].value == 0.0);
  CHECK(flat[1].value == 0.0);
  const auto mixed = daily_returns(series_of("A", {100, 110, 99}));
  CHECK(mixed[0].value == doctest::Approx(0.10));
  CHECK(mixed[1].value == doctest::Approx(-0.10));
  CHECK_THROWS(daily_returns(series_of("A", {100})));
}

TEST_CASE("capm beta basics") {
  const auto bench = returns_of({0.01, -0.02, 0.03, 0.005, -0.01});
  CHECK(capm_beta(bench, bench) == doctest::Approx(1.0));

  auto doubled = bench;
  for (auto& r : doubled) r.value *= 2.0;
  CHECK(capm_beta(doubled, bench) == doctest::Approx(2.0));

  const auto flat = returns_of({0.004, 0.004, 0.004, 0.004, 0.004});
  CHECK(capm_beta(flat, bench) == doctest::Approx(0.0));

  const auto constant_bench = returns_of({0.01, 0.01, 0.01});
  CHECK_THROWS(capm_beta(bench, constant_bench));
}

TEST_CASE("capm beta is affine-invariant in the asset and scales linearly") {
  Rng rng(11);
  auto bench = returns_of({});
  auto asset = returns_of({});
  for (int i = 0; i < 40; ++i) {
    bench.push_back({Date{i}, 0.01 * rng.gaussian()});
    asset.push_back({Date{i}, 0.01 * rng.gaussian()});
  }
  const double base = capm_beta(asset, bench);

  auto shifted = asset;
  for (auto& r : shifted) r.value += 0.123;
  CHECK(capm_beta(shifted, bench) == doctest::Approx(base).epsilon(1e-9));

  auto scaled = asset;
  for (auto& r : scaled) r.value *= -3.5;
  CHECK(capm_beta(scaled, bench) == doctest::Approx(-3.5 * base).epsilon(1e-9));
}

TEST_CASE("capm beta inner-joins on dates") {
  // Asset misses the middle date; only the two shared dates count.
  std::vector<ReturnPoint> asset{{Date{0}, 0.02}, {Date{2}, -0.02}};
  std::vector<ReturnPoint> bench{{Date{0}, 0.01}, {Date{1}, 0.5}, {Date{2}, -0.01}};
  CHECK(capm_beta(asset, bench) == doctest::Approx(2.0));
}

TEST_CASE("riskiness follows |beta * sigma / sigma_max|") {
  CHECK(riskiness(1.0, 0.3, 0.3) == doctest::Approx(1.0));
  CHECK(riskiness(-0.5, 0.15, 0.3) == doctest::Approx(0.25));
  CHECK(riskiness(0.0, 0.2, 0.3) == 0.0);
  CHECK_THROWS(riskiness(1.0, 0.2, 0.0));
}

TEST_CASE("balanced bin sizes") {
  CHECK(balanced_bin_sizes(107) == std::array<size_t, 3>{36, 36, 35});
  CHECK(balanced_bin_sizes(6) == std::array<size_t, 3>{2, 2, 2});
  CHECK(balanced_bin_sizes(7) == std::array<size_t, 3>{3, 2, 2});
  CHECK(balanced_bin_sizes(8) == std::array<size_t, 3>{3, 3, 2});
}

TEST_CASE("ranking sorts ascending with lexicographic ties") {
  std::map<std::string, double> scores{{"A", 0.5}, {"B", 1.5}, {"C", 1.0}};
  std::vector<std::string> pool{"A", "B", "C"};
  const auto cls = rank_into_bins(scores, pool);
  CHECK(cls.bins.at("A") == 0);
  CHECK(cls.bins.at("C") == 1);
  CHECK(cls.bins.at("B") == 2);

  std::map<std::string, double> equal;
  std::vector<std::string> pool6{"F", "E", "D", "C", "B", "A"};
  for (const auto& s : pool6) equal[s] = 1.0;
  const auto tie = rank_into_bins(equal, pool6);
  CHECK(tie.bins.at("A") == 0);
  CHECK(tie.bins.at("B") == 0);
  CHECK(tie.bins.at("C") == 1);
  CHECK(tie.bins.at("D") == 1);
  CHECK(tie.bins.at("E") == 2);
  CHECK(tie.bins.at("F") == 2);

  std::map<std::string, double> missing{{"A", 0.5}};
  CHECK_THROWS(rank_into_bins(missing, pool));
}

TEST_CASE("ranking a 107-stock pool gives bins of 36/36/35") {
  std::map<std::string, double> scores;
  std::vector<std::string> pool;
  Rng rng(3);
  for (int i = 0; i < 107; ++i) {
    const std::string name = "S" + std::to_string(100 + i);
    pool.push_back(name);
    scores[name] = rng.gaussian();
  }
  const auto cls = rank_into_bins(scores, pool);
  std::array<int, 3> counts{0, 0, 0};
  for (const auto& [stock, bin] : cls.bins) ++counts[static_cast<size_t>(bin)];
  CHECK(counts == std::array<int, 3>{36, 36, 35});
}

TEST_CASE("ranking is invariant under strictly monotone score transforms") {
  Rng rng(5);
  std::map<std::string, double> scores;
  std::vector<std::string> pool;
  for (int i = 0; i < 20; ++i) {
    const std::string name = "T" + std::to_string(10 + i);
    pool.push_back(name);
    scores[name] = rng.uniform(0.1, 3.0);
  }
  const auto base = rank_into_bins(scores, pool);
  std::map<std::string, double> transformed;
  for (const auto& [stock, score] : scores)
    transformed[stock] = std::exp(2.0 * score) - 5.0;
  const auto mapped = rank_into_bins(transformed, pool);
  CHECK(base.bins == mapped.bins);
}

TEST_CASE("scramble is deterministic and preserves the bin-size multiset") {
  std::map<std::string, double> scores;
  std::vector<std::string> pool;
  for (int i = 0; i < 17; ++i) {
    const std::string name = "U" + std::to_string(10 + i);
    pool.push_back(name);
    scores[name] = i;
  }
  auto cls = rank_into_bins(scores, pool);

  const auto once = scramble(cls, 99);
  const auto again = scramble(cls, 99);
  CHECK(once.bins == again.bins);
  CHECK(once.scheme == RiskScheme::scrambled);
  CHECK(once.scramble_seed == 99);

  for (uint64_t seed = 0; seed < 200; ++seed) {
    const auto s = scramble(cls, seed);
    std::array<int, 3> counts{0, 0, 0};
    for (const auto& [stock, bin] : s.bins) ++counts[static_cast<size_t>(bin)];
    CHECK(counts == std::array<int, 3>{6, 6, 5});
  }
}

TEST_CASE("scrambles are uniform: bin-0 frequency matches 1/3") {
  std::map<std::string, double> scores{{"A", 1}, {"B", 2}, {"C", 3},
                                       {"D", 4}, {"E", 5}, {"F", 6}};
  std::vector<std::string> pool{"A", "B", "C", "D", "E", "F"};
  const auto cls = rank_into_bins(scores, pool);

  std::map<std::string, int> bin0_hits;
  const int n_seeds = 10000;
  for (int seed = 0; seed < n_seeds; ++seed) {
    const auto s = scramble(cls, static_cast<uint64_t>(seed));
    for (const auto& [stock, bin] : s.bins)
      if (bin == 0) ++bin0_hits[stock];
  }
  for (const auto& stock : pool) {
    const double freq = static_cast<double>(bin0_hits[stock]) / n_seeds;
    CHECK(freq == doctest::Approx(1.0 / 3.0).epsilon(0.06));  // 1/3 +- 0.02
  }
}

TEST_CASE("price CSV parses, groups, and rejects duplicates") {
  std::istringstream in(
      "stock,date,close\n"
      "VOD,2013-06-03,2.10\n"
      "BP,2013-06-03,4.50\n"
      "VOD,2013-06-04,2.15\n");
  const auto series = parse_price_csv(in);
  REQUIRE(series.size() == 2);
  CHECK(series[0].stock == "BP");
  CHECK(series[1].stock == "VOD");
  CHECK(series[1].observations.size() == 2);

  std::istringstream dup(
      "stock,date,close\n"
      "VOD,2013-06-03,2.10\n"
      "VOD,2013-06-03,2.15\n");
  CHECK_THROWS(parse_price_csv(dup));

  std::istringstream bad_price(
      "stock,date,close\n"
      "VOD,2013-06-03,-1\n");
  CHECK_THROWS(parse_price_csv(bad_price));
}

TEST_CASE("classification JSON carries scheme, bins, and betas") {
  std::map<std::string, double> scores{{"A", 0.5}, {"B", 1.5}, {"C", 1.0}};
  std::vector<std::string> pool{"A", "B", "C"};
  auto cls = rank_into_bins(scores, pool);
  cls.betas = scores;
  const std::string json = classification_to_json(cls);
  CHECK(json.find("\"scheme\": \"beta_ranked\"") != std::string::npos);
  CHECK(json.find("\"bins\"") != std::string::npos);
  CHECK(json.find("\"betas\"") != std::string::npos);
}
