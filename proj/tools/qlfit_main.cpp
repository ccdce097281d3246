// qlfit command line: fit | scramble | simulate | risk.
// A key=value config file seeds the run configuration; flags override.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qlfit/pipeline.hpp"

namespace {

struct CliState {
  qlfit::RunConfig config;
  std::string config_path;
  std::string player_id;
  std::string risk_scheme;
  std::string reward_scheme;
  std::string kernel;
  std::string buy_policy;
  long long cap = -1;
};

void add_common(CLI::App* cmd, CliState& s) {
  cmd->add_option("--config", s.config_path, "key = value config file");
  cmd->add_option("--out", s.config.out_dir, "output directory");
  cmd->add_option("--seed", s.config.seed, "master RNG seed");
  cmd->add_option("--threads", s.config.threads, "worker threads (0 = all cores)");
  cmd->add_option("--kernel", s.kernel, "likelihood kernel: auto|scalar|avx2");
}

void add_dataset(CLI::App* cmd, CliState& s) {
  cmd->add_option("--transactions", s.config.transactions, "transaction CSV");
  cmd->add_option("--prices", s.config.prices, "stock price CSV");
  cmd->add_option("--benchmark", s.config.benchmark, "benchmark price CSV");
  cmd->add_option("--min-sells", s.config.min_sells, "activity filter: minimum sells");
  cmd->add_option("--min-span-days", s.config.min_span_days,
                  "activity filter: minimum first-to-last span");
  cmd->add_option("--cap", s.cap, "cap transactions per player (e.g. 25)");
  cmd->add_option("--risk-scheme", s.risk_scheme, "beta|riskiness");
  cmd->add_option("--reward-scheme", s.reward_scheme, "cost_basis");
  cmd->add_option("--lrt-confidence", s.config.lrt_confidence, "LRT confidence level");
  cmd->add_option("--ci-confidence", s.config.ci_confidence, "interval confidence level");
  cmd->add_option("--chance-threshold", s.config.chance_threshold,
                  "population verdict threshold");
}

int apply_overrides(CliState& s, CLI::App* cmd) {
  // Config file first, then explicit flags on top of it.
  if (!s.config_path.empty()) qlfit::apply_config_file(s.config, s.config_path);
  const auto reparse = [&](const char* flag, const std::string& key,
                           const std::string& value) {
    if (cmd->count(flag)) qlfit::apply_config_line(s.config, key, value);
  };
  (void)reparse;
  if (!s.risk_scheme.empty()) qlfit::apply_config_line(s.config, "risk_scheme", s.risk_scheme);
  if (!s.reward_scheme.empty())
    qlfit::apply_config_line(s.config, "reward_scheme", s.reward_scheme);
  if (!s.kernel.empty()) qlfit::apply_config_line(s.config, "kernel", s.kernel);
  if (!s.buy_policy.empty())
    qlfit::apply_config_line(s.config, "sim_buy_policy", s.buy_policy);
  if (s.cap >= 0) s.config.cap = static_cast<size_t>(s.cap);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested Q-learning choice-model fitting for trading logs"};
  app.require_subcommand(1);

  CliState s;

  CLI::App* fit = app.add_subcommand("fit", "fit all players and write reports");
  add_common(fit, s);
  add_dataset(fit, s);
  fit->add_option("--n-scrambles", s.config.n_scrambles, "(recorded in config snapshot)");
  fit->add_flag("--audit-starts", s.config.audit_starts,
                "include per-start audit data in reports");

  CLI::App* scramble =
      app.add_subcommand("scramble", "ranked-vs-scrambled experiment for one player");
  add_common(scramble, s);
  add_dataset(scramble, s);
  scramble->add_option("--player", s.player_id, "player id")->required();
  scramble->add_option("--n-scrambles", s.config.n_scrambles, "number of scrambles");

  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  add_common(simulate, s);
  simulate->add_option("--agents", s.config.sim.n_agents, "number of agents");
  simulate->add_option("--n-sells", s.config.sim.n_sells, "sells per agent");
  simulate->add_option("--n-sells-min", s.config.sim.n_sells_min, "lower bound for drawn sells");
  simulate->add_option("--n-sells-max", s.config.sim.n_sells_max, "upper bound for drawn sells");
  simulate->add_option("--alpha", s.config.sim.alpha, "agent learning rate");
  simulate->add_option("--beta", s.config.sim.beta, "agent inverse temperature");
  simulate->add_option("--gamma", s.config.sim.gamma, "agent discount factor");
  simulate->add_option("--buy-policy", s.buy_policy, "uniform|round_robin");
  simulate->add_option("--trade-volume", s.config.sim.trade_volume, "shares per trade");
  simulate->add_option("--hold-days", s.config.sim.hold_days, "days between buy and sell");
  simulate->add_option("--stocks", s.config.sim.market.n_stocks, "market size");
  simulate->add_option("--horizon-days", s.config.sim.market.horizon_days,
                       "market length in daily returns");

  CLI::App* risk = app.add_subcommand("risk", "emit the risk classification only");
  add_common(risk, s);
  add_dataset(risk, s);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* active = app.get_subcommands().front();
    apply_overrides(s, active);
    if (active == fit) return qlfit::cmd_fit(s.config, std::cerr);
    if (active == scramble) return qlfit::cmd_scramble(s.config, s.player_id, std::cerr);
    if (active == simulate) return qlfit::cmd_simulate(s.config, std::cerr);
    if (active == risk) return qlfit::cmd_risk(s.config, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
