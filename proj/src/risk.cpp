#include "qlfit/risk.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qlfit/csv.hpp"
#include "qlfit/rng.hpp"

namespace qlfit {

std::vector<ReturnPoint> daily_returns(const PriceSeries& series) {
  if (series.observations.size() < 2)
    throw std::runtime_error("daily_returns: series \"" + series.stock +
                             "\" has fewer than 2 observations");
  std::vector<ReturnPoint> returns;
  returns.reserve(series.observations.size() - 1);
  for (size_t i = 1; i < series.observations.size(); ++i) {
    const auto& prev = series.observations[i - 1];
    const auto& cur = series.observations[i];
    returns.push_back({cur.date, cur.close / prev.close - 1.0});
  }
  return returns;
}

namespace {

// Inner join of two date-sorted return series.
std::pair<std::vector<double>, std::vector<double>> align_returns(
    std::span<const ReturnPoint> a, std::span<const ReturnPoint> b) {
  std::vector<double> xs, ys;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].date < b[j].date) {
      ++i;
    } else if (b[j].date < a[i].date) {
      ++j;
    } else {
      xs.push_back(a[i].value);
      ys.push_back(b[j].value);
      ++i;
      ++j;
    }
  }
  return {std::move(xs), std::move(ys)};
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double capm_beta(std::span<const ReturnPoint> asset_returns,
                 std::span<const ReturnPoint> benchmark_returns) {
  const auto [asset, bench] = align_returns(asset_returns, benchmark_returns);
  if (asset.size() < 2)
    throw std::runtime_error("capm_beta: fewer than 2 aligned return observations");
  const double asset_mean = mean(asset);
  const double bench_mean = mean(bench);
  double cov = 0.0, var = 0.0;
  for (size_t i = 0; i < asset.size(); ++i) {
    const double db = bench[i] - bench_mean;
    cov += (asset[i] - asset_mean) * db;
    var += db * db;
  }
  // Sample normalization (n-1) for both; the factor cancels in the ratio.
  if (var == 0.0)
    throw std::runtime_error("capm_beta: benchmark returns have zero variance");
  return cov / var;
}

double return_std(std::span<const ReturnPoint> returns) {
  if (returns.size() < 2)
    throw std::runtime_error("return_std: fewer than 2 return observations");
  double m = 0.0;
  for (const auto& r : returns) m += r.value;
  m /= static_cast<double>(returns.size());
  double ss = 0.0;
  for (const auto& r : returns) ss += (r.value - m) * (r.value - m);
  return std::sqrt(ss / static_cast<double>(returns.size() - 1));
}

double riskiness(double beta, double sigma, double sigma_max) {
  if (sigma_max <= 0.0)
    throw std::runtime_error("riskiness: sigma_max must be positive");
  return std::abs(beta * sigma / sigma_max);
}

std::array<size_t, 3> balanced_bin_sizes(size_t n_stocks) {
  const size_t base = n_stocks / 3;
  const size_t rem = n_stocks % 3;
  return {base + (rem > 0 ? 1 : 0), base + (rem > 1 ? 1 : 0), base};
}

RiskClassification rank_into_bins(const std::map<std::string, double>& scores,
                                  std::span<const std::string> pool) {
  std::vector<std::pair<double, std::string>> ranked;
  ranked.reserve(pool.size());
  for (const auto& stock : pool) {
    const auto it = scores.find(stock);
    if (it == scores.end())
      throw std::runtime_error("rank_into_bins: no score for stock \"" + stock + "\"");
    ranked.emplace_back(it->second, stock);
  }
  std::sort(ranked.begin(), ranked.end());  // score, then ticker

  RiskClassification out;
  const auto sizes = balanced_bin_sizes(ranked.size());
  size_t index = 0;
  for (int bin = 0; bin < 3; ++bin) {
    for (size_t k = 0; k < sizes[static_cast<size_t>(bin)]; ++k, ++index)
      out.bins[ranked[index].second] = bin;
  }
  return out;
}

RiskClassification scramble(const RiskClassification& classification, uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(classification.bins.size());
  for (const auto& [stock, bin] : classification.bins) labels.push_back(bin);

  Rng rng(seed);
  rng.shuffle(labels);

  RiskClassification out = classification;
  out.scheme = RiskScheme::scrambled;
  out.scramble_seed = seed;
  size_t i = 0;
  for (auto& [stock, bin] : out.bins) bin = labels[i++];
  return out;
}

RiskClassification build_classification(std::span<const PriceSeries> prices,
                                        const PriceSeries& benchmark,
                                        RiskScheme scheme) {
  if (scheme == RiskScheme::scrambled)
    throw std::runtime_error("build_classification: scrambles are derived, not built");

  const auto bench_returns = daily_returns(benchmark);

  std::map<std::string, double> betas, sigmas;
  std::vector<std::string> pool;
  for (const auto& series : prices) {
    const auto returns = daily_returns(series);
    betas[series.stock] = capm_beta(returns, bench_returns);
    sigmas[series.stock] = return_std(returns);
    pool.push_back(series.stock);
  }

  std::map<std::string, double> scores;
  if (scheme == RiskScheme::beta_ranked) {
    scores = betas;
  } else {
    double sigma_max = 0.0;
    for (const auto& [stock, sigma] : sigmas) sigma_max = std::max(sigma_max, sigma);
    for (const auto& [stock, beta] : betas)
      scores[stock] = riskiness(beta, sigmas[stock], sigma_max);
  }

  RiskClassification out = rank_into_bins(scores, pool);
  out.scheme = scheme;
  out.betas = std::move(betas);
  out.sigma = std::move(sigmas);
  return out;
}

std::vector<PriceSeries> parse_price_csv(std::istream& in) {
  if (!in) throw std::runtime_error("price stream is not readable");
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("price stream is empty (missing header)");
  {
    const auto fields = split_csv_line(line);
    if (fields.size() != 3 || !iequals(trim(fields[0]), "stock") ||
        !iequals(trim(fields[1]), "date") || !iequals(trim(fields[2]), "close"))
      throw std::runtime_error("unexpected price header: \"" + line + "\"");
  }

  std::map<std::string, PriceSeries> by_stock;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw std::runtime_error("price line " + std::to_string(line_no) + ": expected 3 fields");
    const std::string stock{trim(fields[0])};
    const auto date = parse_date(trim(fields[1]));
    if (stock.empty() || !date)
      throw std::runtime_error("price line " + std::to_string(line_no) + ": bad stock or date");
    const auto close_text = trim(fields[2]);
    double close = 0.0;
    const auto res = std::from_chars(close_text.data(), close_text.data() + close_text.size(), close);
    if (res.ec != std::errc{} || res.ptr != close_text.data() + close_text.size() || !(close > 0.0))
      throw std::runtime_error("price line " + std::to_string(line_no) + ": bad close price");
    auto& series = by_stock[stock];
    series.stock = stock;
    series.observations.push_back({*date, close});
  }
  if (in.bad()) throw std::runtime_error("I/O error reading price stream");

  std::vector<PriceSeries> out;
  out.reserve(by_stock.size());
  for (auto& [stock, series] : by_stock) {
    std::sort(series.observations.begin(), series.observations.end(),
              [](const PricePoint& a, const PricePoint& b) { return a.date < b.date; });
    for (size_t i = 1; i < series.observations.size(); ++i)
      if (!(series.observations[i - 1].date < series.observations[i].date))
        throw std::runtime_error("duplicate date in price series for \"" + stock + "\"");
    out.push_back(std::move(series));
  }
  return out;
}

std::string serialize_price_csv(std::span<const PriceSeries> series) {
  std::string out = "stock,date,close\n";
  for (const auto& s : series) {
    for (const auto& obs : s.observations) {
      out += s.stock;
      out.push_back(',');
      out += format_date(obs.date);
      out.push_back(',');
      out += format_double(obs.close);
      out.push_back('\n');
    }
  }
  return out;
}

const char* scheme_name(RiskScheme scheme) {
  switch (scheme) {
    case RiskScheme::beta_ranked: return "beta_ranked";
    case RiskScheme::riskiness_ranked: return "riskiness_ranked";
    case RiskScheme::scrambled: return "scrambled";
  }
  return "unknown";
}

std::string classification_to_json(const RiskClassification& classification) {
  nlohmann::json j;
  std::string scheme{scheme_name(classification.scheme)};
  if (classification.scheme == RiskScheme::scrambled)
    scheme += "(" + std::to_string(classification.scramble_seed) + ")";
  j["scheme"] = scheme;
  j["bins"] = classification.bins;
  j["betas"] = classification.betas;
  return j.dump(2) + "\n";
}

}  // namespace qlfit
