#include "qlfit/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qlfit/csv.hpp"
#include "qlfit/parallel.hpp"
#include "qlfit/rng.hpp"

namespace qlfit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct OutputDir {
  fs::path root;
  std::vector<std::string> files;

  explicit OutputDir(const std::string& dir) : root(dir) {
    fs::create_directories(root);
  }

  void write(const std::string& relative, const std::string& content) {
    const fs::path path = root / relative;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    files.push_back(relative);
  }
};

json config_to_json(const RunConfig& c) {
  json j;
  j["transactions"] = c.transactions;
  j["prices"] = c.prices;
  j["benchmark"] = c.benchmark;
  j["out"] = c.out_dir;
  j["min_sells"] = c.min_sells;
  j["min_span_days"] = c.min_span_days;
  if (c.cap) j["cap"] = *c.cap;
  j["risk_scheme"] = c.risk_scheme == RiskScheme::beta_ranked ? "beta" : "riskiness";
  j["reward_scheme"] = c.reward_scheme;
  j["lrt_confidence"] = c.lrt_confidence;
  j["ci_confidence"] = c.ci_confidence;
  j["chance_threshold"] = c.chance_threshold;
  j["n_scrambles"] = c.n_scrambles;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["rho"] = c.fit.rho;
  j["kernel"] = c.fit.kernel == kernels::KernelChoice::auto_select ? "auto"
                : c.fit.kernel == kernels::KernelChoice::scalar    ? "scalar"
                                                                   : "avx2";
  j["sim"] = {{"agents", c.sim.n_agents},
              {"n_sells", c.sim.n_sells},
              {"n_sells_min", c.sim.n_sells_min},
              {"n_sells_max", c.sim.n_sells_max},
              {"alpha", c.sim.alpha},
              {"beta", c.sim.beta},
              {"gamma", c.sim.gamma},
              {"trade_volume", c.sim.trade_volume},
              {"hold_days", c.sim.hold_days},
              {"stocks", c.sim.market.n_stocks},
              {"horizon_days", c.sim.market.horizon_days},
              {"benchmark_vol", c.sim.market.benchmark_vol},
              {"benchmark_drift", c.sim.market.benchmark_drift},
              {"idio_vol", c.sim.market.idio_vol}};
  return j;
}

void write_manifest(OutputDir& out, const char* command, const RunConfig& config) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = config_to_json(config);
  manifest["files"] = out.files;
  // Written last; lists everything else the run produced.
  const fs::path path = out.root / "manifest.json";
  std::ofstream stream(path, std::ios::binary);
  if (!stream) throw std::runtime_error("cannot write " + path.string());
  stream << manifest.dump(2) << '\n';
}

std::vector<PlayerHistory> load_histories(const RunConfig& config,
                                          std::vector<Diagnostic>& diagnostics) {
  std::ifstream in(config.transactions);
  if (!in)
    throw std::runtime_error("cannot open transactions file \"" + config.transactions + "\"");
  ParseResult parsed = parse_transactions(in);
  diagnostics = std::move(parsed.diagnostics);

  std::vector<PlayerHistory> histories = build_histories(parsed.records, &diagnostics);
  histories = filter_active(std::move(histories), config.min_sells, config.min_span_days);
  if (config.cap) {
    for (auto& history : histories) history = cap_transactions(history, *config.cap);
  }
  return histories;
}

RiskClassification load_classification(const RunConfig& config) {
  std::ifstream price_in(config.prices);
  if (!price_in)
    throw std::runtime_error("cannot open prices file \"" + config.prices + "\"");
  const auto prices = parse_price_csv(price_in);

  std::ifstream bench_in(config.benchmark);
  if (!bench_in)
    throw std::runtime_error("cannot open benchmark file \"" + config.benchmark + "\"");
  const auto bench_series = parse_price_csv(bench_in);
  if (bench_series.size() != 1)
    throw std::runtime_error("benchmark file must contain exactly one series, found " +
                             std::to_string(bench_series.size()));

  return build_classification(prices, bench_series.front(), config.risk_scheme);
}

json params_to_json(const ModelParams& params) {
  return {{"alpha", params.alpha},
          {"beta", params.beta_inv_temp},
          {"gamma", params.gamma},
          {"rho", params.rho}};
}

json starts_to_json(const std::vector<StartOutcome>& starts) {
  json arr = json::array();
  for (const auto& s : starts) {
    arr.push_back({{"entry", s.entry},
                   {"converged", s.converged},
                   {"nll", s.nll},
                   {"ok", s.ok},
                   {"status", s.status}});
  }
  return arr;
}

json comparison_to_json(const ComparisonResult& cmp) {
  return {{"statistic", cmp.lrt_statistic},
          {"dof", cmp.dof},
          {"critical_value", cmp.critical_value},
          {"p_value", cmp.p_value},
          {"significant", cmp.significant}};
}

struct PlayerReport {
  std::string player;
  bool ok = false;
  std::string error;
  int64_t n_sells = 0;
  FitResult random_fit, myopic_fit, full_fit;
  ComparisonResult myopic_vs_random, full_vs_myopic, full_vs_random;
  double bic_random = 0.0, bic_myopic = 0.0, bic_full = 0.0;
};

PlayerReport fit_one_player(const PlayerHistory& history,
                            const RiskClassification& classification,
                            const RunConfig& config) {
  PlayerReport report;
  report.player = history.player_id;
  try {
    report.n_sells = static_cast<int64_t>(history.sells.size());
    report.random_fit = fit_random(report.n_sells);
    report.myopic_fit =
        fit_player(history, classification, ModelKind::myopic, config.fit);
    report.full_fit = fit_player(history, classification, ModelKind::full_rl,
                                 config.fit, &report.myopic_fit);

    report.myopic_vs_random =
        likelihood_ratio_test(report.random_fit, report.myopic_fit, config.lrt_confidence);
    report.full_vs_myopic =
        likelihood_ratio_test(report.myopic_fit, report.full_fit, config.lrt_confidence);
    report.full_vs_random =
        likelihood_ratio_test(report.random_fit, report.full_fit, config.lrt_confidence);

    report.bic_random = bic(report.random_fit.nll, 0, report.n_sells);
    report.bic_myopic = bic(report.myopic_fit.nll, 2, report.n_sells);
    report.bic_full = bic(report.full_fit.nll, 3, report.n_sells);
    report.ok = true;
  } catch (const std::exception& e) {
    report.error = e.what();
  }
  return report;
}

json report_to_json(const PlayerReport& r, bool audit_starts) {
  json myopic{{"params", params_to_json(*r.myopic_fit.best_params)},
              {"nll", r.myopic_fit.nll}};
  json full{{"params", params_to_json(*r.full_fit.best_params)},
            {"nll", r.full_fit.nll}};
  if (audit_starts) {
    myopic["starts"] = starts_to_json(r.myopic_fit.starts);
    full["starts"] = starts_to_json(r.full_fit.starts);
  }
  return json{{"player", r.player},
              {"n_sells", r.n_sells},
              {"random_nll", r.random_fit.nll},
              {"myopic", myopic},
              {"full", full},
              {"lrt",
               {{"myopic_vs_random", comparison_to_json(r.myopic_vs_random)},
                {"full_vs_myopic", comparison_to_json(r.full_vs_myopic)},
                {"full_vs_random", comparison_to_json(r.full_vs_random)}}},
              {"bic",
               {{"random", r.bic_random},
                {"myopic", r.bic_myopic},
                {"full", r.bic_full}}}};
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

std::string fig1_mle_csv(const std::vector<const PlayerReport*>& reports,
                         const char* col_model, const char* col_base,
                         double (*model_nll)(const PlayerReport&),
                         double (*base_nll)(const PlayerReport&),
                         bool (*significant)(const PlayerReport&)) {
  std::string csv = std::string("player,") + col_model + "," + col_base + ",significant\n";
  for (const auto* r : reports) {
    csv += r->player + "," + format_double(model_nll(*r)) + "," +
           format_double(base_nll(*r)) + "," + bool_str(significant(*r)) + "\n";
  }
  return csv;
}

std::string fig1_lrt_csv(const std::vector<const PlayerReport*>& reports,
                         const ComparisonResult PlayerReport::* cmp) {
  std::string csv = "player,lrt_statistic,critical_value,p_value,significant\n";
  for (const auto* r : reports) {
    const ComparisonResult& c = r->*cmp;
    csv += r->player + "," + format_double(c.lrt_statistic) + "," +
           format_double(c.critical_value) + "," + format_double(c.p_value) + "," +
           bool_str(c.significant) + "\n";
  }
  return csv;
}

json verdict_to_json(const VerdictResult& v) {
  return {{"successes", v.stat.successes},
          {"trials", v.stat.trials},
          {"proportion", v.stat.proportion()},
          {"ci_low", v.stat.low},
          {"ci_high", v.stat.high},
          {"confidence", v.stat.confidence},
          {"threshold", v.threshold},
          {"verdict_positive", v.positive}};
}

}  // namespace

int cmd_fit(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
    std::vector<Diagnostic> diagnostics;
    std::vector<PlayerHistory> histories = load_histories(config, diagnostics);

    // Players whose capped history has no sells left cannot be fitted.
    std::vector<PlayerHistory> fittable;
    for (auto& history : histories) {
      if (history.sells.empty()) {
        diagnostics.push_back({0, history.player_id,
                               "no valid sell events after preprocessing; skipped"});
      } else {
        fittable.push_back(std::move(history));
      }
    }
    size_t n_failed = histories.size() - fittable.size();

    if (fittable.empty()) {
      log << "fit: no fittable players after preprocessing\n";
      return 1;
    }

    const RiskClassification classification = load_classification(config);

    std::vector<PlayerReport> reports(fittable.size());
    parallel_for(fittable.size(), config.threads, [&](size_t i) {
      reports[i] = fit_one_player(fittable[i], classification, config);
    });

    OutputDir out(config.out_dir);
    std::vector<const PlayerReport*> ok;
    for (const auto& report : reports) {
      if (!report.ok) {
        ++n_failed;
        diagnostics.push_back({0, report.player, "fit failed: " + report.error});
        continue;
      }
      ok.push_back(&report);
      out.write("reports/" + report.player + ".json",
                report_to_json(report, config.audit_starts).dump(2) + "\n");
    }

    if (ok.empty()) {
      out.write("diagnostics.jsonl", diagnostics_to_json_lines(diagnostics));
      write_manifest(out, "fit", config);
      log << "fit: every player failed\n";
      return 1;
    }

    out.write("fig1a.csv",
              fig1_mle_csv(
                  ok, "myopic_nll", "random_nll",
                  [](const PlayerReport& r) { return r.myopic_fit.nll; },
                  [](const PlayerReport& r) { return r.random_fit.nll; },
                  [](const PlayerReport& r) { return r.myopic_vs_random.significant; }));
    out.write("fig1b.csv", fig1_lrt_csv(ok, &PlayerReport::myopic_vs_random));
    out.write("fig1c.csv",
              fig1_mle_csv(
                  ok, "full_nll", "myopic_nll",
                  [](const PlayerReport& r) { return r.full_fit.nll; },
                  [](const PlayerReport& r) { return r.myopic_fit.nll; },
                  [](const PlayerReport& r) { return r.full_vs_myopic.significant; }));
    out.write("fig1d.csv", fig1_lrt_csv(ok, &PlayerReport::full_vs_myopic));
    out.write("fig1e.csv",
              fig1_mle_csv(
                  ok, "full_nll", "random_nll",
                  [](const PlayerReport& r) { return r.full_fit.nll; },
                  [](const PlayerReport& r) { return r.random_fit.nll; },
                  [](const PlayerReport& r) { return r.full_vs_random.significant; }));
    out.write("fig1f.csv", fig1_lrt_csv(ok, &PlayerReport::full_vs_random));

    std::vector<ComparisonResult> myo_v_rand, full_v_rand, full_v_myo;
    for (const auto* r : ok) {
      myo_v_rand.push_back(r->myopic_vs_random);
      full_v_rand.push_back(r->full_vs_random);
      full_v_myo.push_back(r->full_vs_myopic);
    }
    const VerdictResult verdict_myopic =
        population_verdict(myo_v_rand, config.ci_confidence, config.chance_threshold);
    const VerdictResult verdict_full =
        population_verdict(full_v_rand, config.ci_confidence, config.chance_threshold);
    const VerdictResult verdict_nested =
        population_verdict(full_v_myo, config.ci_confidence, config.chance_threshold);

    json population{{"n_players", ok.size()},
                    {"n_failed", n_failed},
                    {"risk_scheme", scheme_name(classification.scheme)},
                    {"lrt_confidence", config.lrt_confidence},
                    {"ci_confidence", config.ci_confidence},
                    {"chance_threshold", config.chance_threshold},
                    {"myopic_vs_random", verdict_to_json(verdict_myopic)},
                    {"full_vs_random", verdict_to_json(verdict_full)},
                    {"full_vs_myopic", verdict_to_json(verdict_nested)}};
    out.write("population.json", population.dump(2) + "\n");

    std::string fig3 = "comparison,successes,trials,proportion,ci_low,ci_high,threshold,verdict\n";
    const auto fig3_row = [&](const char* name, const VerdictResult& v) {
      fig3 += std::string(name) + "," + std::to_string(v.stat.successes) + "," +
              std::to_string(v.stat.trials) + "," + format_double(v.stat.proportion()) +
              "," + format_double(v.stat.low) + "," + format_double(v.stat.high) + "," +
              format_double(v.threshold) + "," + bool_str(v.positive) + "\n";
    };
    fig3_row("myopic_vs_random", verdict_myopic);
    fig3_row("full_vs_random", verdict_full);
    out.write("fig3.csv", fig3);

    out.write("diagnostics.jsonl", diagnostics_to_json_lines(diagnostics));
    write_manifest(out, "fit", config);

    log << "fit: " << ok.size() << " players fitted, " << n_failed << " failed, "
        << diagnostics.size() << " diagnostics\n";
    return n_failed > 0 ? 2 : 0;
  } catch (const std::exception& e) {
    log << "fit: fatal: " << e.what() << "\n";
    return 1;
  }
}

int cmd_scramble(const RunConfig& config, const std::string& player_id,
                 std::ostream& log) {
  try {
    config.validate();
    std::vector<Diagnostic> diagnostics;
    const std::vector<PlayerHistory> histories = load_histories(config, diagnostics);
    const PlayerHistory* player = nullptr;
    for (const auto& history : histories)
      if (history.player_id == player_id) player = &history;
    if (!player || player->sells.empty()) {
      log << "scramble: player \"" << player_id << "\" not found after filtering\n";
      return 1;
    }

    const RiskClassification classification = load_classification(config);
    const ScrambleOutcome outcome =
        scrambled_experiment(*player, classification, config.n_scrambles, config.seed,
                             config.fit, config.ci_confidence);

    OutputDir out(config.out_dir);
    std::string csv = "player,successes,trials,prob,ci_low,ci_high\n";
    csv += player_id + "," + std::to_string(outcome.stat.successes) + "," +
           std::to_string(outcome.stat.trials) + "," +
           format_double(outcome.stat.proportion()) + "," +
           format_double(outcome.stat.low) + "," + format_double(outcome.stat.high) + "\n";
    out.write("fig2_" + player_id + ".csv", csv);

    json detail{{"player", player_id},
                {"ranked_nll", outcome.ranked_nll},
                {"ranked_bic", outcome.ranked_bic},
                {"successes", outcome.stat.successes},
                {"trials", outcome.stat.trials},
                {"prob", outcome.stat.proportion()},
                {"ci_low", outcome.stat.low},
                {"ci_high", outcome.stat.high},
                {"confidence", outcome.stat.confidence},
                {"failed_scrambles", outcome.failed_scrambles},
                {"failures", outcome.failures}};
    out.write("scramble_" + player_id + ".json", detail.dump(2) + "\n");
    write_manifest(out, "scramble", config);

    log << "scramble: " << outcome.stat.successes << "/" << outcome.stat.trials
        << " scrambles beaten by the ranked bins\n";
    return 0;
  } catch (const std::exception& e) {
    log << "scramble: fatal: " << e.what() << "\n";
    return 1;
  }
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
    const SimConfig& sim = config.sim;
    if (sim.n_agents < 1) throw std::runtime_error("simulate: need at least one agent");

    // Per-agent sell counts, fixed or drawn uniformly from [min, max].
    std::vector<int> sell_counts(static_cast<size_t>(sim.n_agents), sim.n_sells);
    if (sim.n_sells_max > 0) {
      if (sim.n_sells_min < 1 || sim.n_sells_min > sim.n_sells_max)
        throw std::runtime_error("simulate: bad n_sells range");
      Rng count_rng(derive_seed(config.seed, 7));
      for (int& count : sell_counts)
        count = sim.n_sells_min +
                static_cast<int>(count_rng.below(
                    static_cast<uint64_t>(sim.n_sells_max - sim.n_sells_min + 1)));
    }

    int max_sells = 0;
    for (int count : sell_counts) max_sells = std::max(max_sells, count);

    MarketSpec market_spec = sim.market;
    market_spec.seed = derive_seed(config.seed, 11);
    const int needed_days = max_sells * (sim.hold_days + 1);
    market_spec.horizon_days = std::max(market_spec.horizon_days, needed_days);

    const MarketData market = generate_market(market_spec);
    const RiskClassification truth = market.true_classification();

    std::vector<TransactionRecord> all_records;
    json agents_json = json::array();
    for (int i = 0; i < sim.n_agents; ++i) {
      AgentSpec agent;
      char name[32];
      std::snprintf(name, sizeof name, "agent%03d", i);
      agent.player_id = name;
      agent.params = {sim.alpha, sim.beta, sim.gamma, config.fit.rho};
      agent.n_sells = sell_counts[static_cast<size_t>(i)];
      agent.buy_policy = sim.buy_policy;
      agent.initial_cash = sim.initial_cash;
      agent.trade_volume = sim.trade_volume;
      agent.hold_days = sim.hold_days;
      agent.seed = derive_seed(config.seed, 100 + static_cast<uint64_t>(i));

      GeneratedAgent generated = generate_agent_history(agent, market, truth);
      all_records.insert(all_records.end(), generated.records.begin(),
                         generated.records.end());
      agents_json.push_back({{"player", agent.player_id},
                             {"alpha", agent.params.alpha},
                             {"beta", agent.params.beta_inv_temp},
                             {"gamma", agent.params.gamma},
                             {"rho", agent.params.rho},
                             {"n_sells", agent.n_sells},
                             {"initial_cash", agent.initial_cash},
                             {"seed", agent.seed}});
    }

    OutputDir out(config.out_dir);
    out.write("transactions.csv", serialize_transactions(all_records));
    out.write("prices.csv", serialize_price_csv(market.stocks));
    const PriceSeries bench[] = {market.benchmark};
    out.write("benchmark.csv", serialize_price_csv(bench));

    json truth_json{{"market",
                     {{"seed", market_spec.seed},
                      {"n_stocks", market_spec.n_stocks},
                      {"horizon_days", market_spec.horizon_days},
                      {"benchmark_vol", market_spec.benchmark_vol},
                      {"benchmark_drift", market_spec.benchmark_drift},
                      {"idio_vol", market_spec.idio_vol}}},
                    {"true_bins", market.true_bins},
                    {"true_betas", market.true_betas},
                    {"agents", agents_json}};
    out.write("ground_truth.json", truth_json.dump(2) + "\n");
    write_manifest(out, "simulate", config);

    log << "simulate: " << sim.n_agents << " agents, " << all_records.size()
        << " transactions, " << market.stocks.size() << " stocks\n";
    return 0;
  } catch (const std::exception& e) {
    log << "simulate: fatal: " << e.what() << "\n";
    return 1;
  }
}

int cmd_risk(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
    const RiskClassification classification = load_classification(config);
    OutputDir out(config.out_dir);
    out.write("classification.json", classification_to_json(classification));
    write_manifest(out, "risk", config);
    log << "risk: classified " << classification.bins.size() << " stocks ("
        << scheme_name(classification.scheme) << ")\n";
    return 0;
  } catch (const std::exception& e) {
    log << "risk: fatal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qlfit
