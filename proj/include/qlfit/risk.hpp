#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qlfit/date.hpp"

namespace qlfit {

struct PricePoint {
  Date date;
  double close = 0.0;
};

// Daily close series for one stock; dates strictly increasing, prices > 0.
struct PriceSeries {
  std::string stock;
  std::vector<PricePoint> observations;
};

struct ReturnPoint {
  Date date;
  double value = 0.0;
};

enum class RiskScheme { beta_ranked, riskiness_ranked, scrambled };

// Stock -> risk bin {0,1,2} (bin 0 = safest) plus the measures behind the
// ranking. Bin sizes are ceil-balanced: for a 107-stock pool, 36/36/35.
struct RiskClassification {
  std::map<std::string, int> bins;
  std::map<std::string, double> betas;
  std::map<std::string, double> sigma;  // std dev of daily returns
  RiskScheme scheme = RiskScheme::beta_ranked;
  uint64_t scramble_seed = 0;
};

// Simple returns p_t / p_{t-1} - 1 over consecutive observations.
std::vector<ReturnPoint> daily_returns(const PriceSeries& series);

// Sample covariance over sample variance, inner-joined on return dates.
double capm_beta(std::span<const ReturnPoint> asset_returns,
                 std::span<const ReturnPoint> benchmark_returns);

double return_std(std::span<const ReturnPoint> returns);

// Alternative score |beta * sigma / sigma_max|.
double riskiness(double beta, double sigma, double sigma_max);

// First (lowest-score) balanced block -> bin 0, and so on; score ties broken
// by ascending stock id.
RiskClassification rank_into_bins(const std::map<std::string, double>& scores,
                                  std::span<const std::string> pool);

// bins[i] = base + 1 for the first N%3 bins.
std::array<size_t, 3> balanced_bin_sizes(size_t n_stocks);

// Uniform among assignments with the same bin-size multiset; deterministic
// given the seed.
RiskClassification scramble(const RiskClassification& classification, uint64_t seed);

// Computes betas and sigmas against the benchmark and ranks by the chosen
// scheme. Every pool stock needs >= 2 aligned returns.
RiskClassification build_classification(std::span<const PriceSeries> prices,
                                        const PriceSeries& benchmark,
                                        RiskScheme scheme);

// Price CSV, header `stock,date,close`; series returned sorted by ticker,
// observations sorted by date (duplicated dates rejected).
std::vector<PriceSeries> parse_price_csv(std::istream& in);
std::string serialize_price_csv(std::span<const PriceSeries> series);

std::string classification_to_json(const RiskClassification& classification);

const char* scheme_name(RiskScheme scheme);

}  // namespace qlfit
