#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "qlfit/fit.hpp"
#include "qlfit/risk.hpp"
#include "qlfit/sim.hpp"

namespace qlfit {

struct SimConfig {
  MarketSpec market;
  int n_agents = 10;
  int n_sells = 30;
  int n_sells_min = 0;  // when max > 0, per-agent counts are drawn uniformly
  int n_sells_max = 0;
  double alpha = 0.8;
  double beta = 20.0;
  double gamma = 0.0;
  BuyPolicy buy_policy = BuyPolicy::uniform_random;
  int64_t trade_volume = 100;
  int hold_days = 2;
  double initial_cash = 100000.0;
};

// Everything a run needs; a key=value config file seeds it and command-line
// flags override individual fields.
struct RunConfig {
  std::string transactions;
  std::string prices;
  std::string benchmark;
  std::string out_dir = "out";

  size_t min_sells = 5;
  int min_span_days = 30;
  std::optional<size_t> cap;  // 25 reproduces the capped configuration

  RiskScheme risk_scheme = RiskScheme::beta_ranked;
  std::string reward_scheme = "cost_basis";

  double lrt_confidence = 0.95;
  double ci_confidence = 0.99;
  double chance_threshold = 0.5;
  int n_scrambles = 500;
  uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  bool audit_starts = false;

  FitConfig fit;
  SimConfig sim;

  void validate() const;  // throws on out-of-range settings
};

// `key = value` lines, '#' comments; unknown keys are an error. Values use
// the same spellings as the CLI flags.
void apply_config_file(RunConfig& config, const std::string& path);
void apply_config_line(RunConfig& config, const std::string& key, const std::string& value);

// Exit codes: 0 success, 1 fatal, 2 partial per-player failures.
int cmd_fit(const RunConfig& config, std::ostream& log);
int cmd_scramble(const RunConfig& config, const std::string& player_id, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_risk(const RunConfig& config, std::ostream& log);

}  // namespace qlfit
