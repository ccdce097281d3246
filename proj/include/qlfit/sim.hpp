#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qlfit/date.hpp"
#include "qlfit/ingest.hpp"
#include "qlfit/model.hpp"
#include "qlfit/risk.hpp"

namespace qlfit {

// Single-factor Gaussian market: stock returns are beta * benchmark return
// plus idiosyncratic noise, so the CAPM regression is exactly well
// specified and the true bins are recoverable from the emitted prices.
struct MarketSpec {
  int n_stocks = 107;
  int horizon_days = 250;  // number of daily returns; prices have one more row
  double benchmark_vol = 0.01;
  double benchmark_drift = 0.0;
  std::array<std::array<double, 2>, 3> bin_beta_ranges{
      {{0.2, 0.7}, {0.8, 1.3}, {1.4, 2.0}}};
  double idio_vol = 0.02;
  uint64_t seed = 1;
  Date start_date{days_from_civil(2013, 6, 1)};

  void validate() const;  // throws on bad ranges or volatilities
};

struct MarketData {
  PriceSeries benchmark;
  std::vector<PriceSeries> stocks;
  std::map<std::string, int> true_bins;
  std::map<std::string, double> true_betas;

  // The generating assignment as a classification agents can act on.
  RiskClassification true_classification() const;
};

MarketData generate_market(const MarketSpec& spec);

enum class BuyPolicy { uniform_random, round_robin };

struct AgentSpec {
  std::string player_id = "agent000";
  ModelParams params{0.8, 20.0, 0.0, 500.0};
  int n_sells = 30;
  BuyPolicy buy_policy = BuyPolicy::uniform_random;
  double initial_cash = 100000.0;  // GBP, recorded for the ground truth
  int64_t trade_volume = 100;
  int hold_days = 2;  // days between a buy and its matching sell
  uint64_t seed = 1;
};

struct GeneratedAgent {
  std::vector<TransactionRecord> records;  // chronological buy/sell pairs
  PlayerHistory history;
  std::vector<int> actions;          // bin chosen at each sell
  std::vector<double> chosen_probs;  // softmax probability of that bin
};

// Q-learning agent replaying its own policy: pick a bin by softmax over the
// agent's Q table, a stock inside the bin by the buy policy, buy, then sell
// hold_days later; reward, profit, state, and Q updates go through the same
// model primitives the likelihood replay uses, so replaying the emitted
// history with the true parameters reproduces chosen_probs exactly.
GeneratedAgent generate_agent_history(const AgentSpec& agent, const MarketData& market,
                                      const RiskClassification& classification);

}  // namespace qlfit
