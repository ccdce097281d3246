#include "qlfit/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qlfit/portfolio.hpp"
#include "qlfit/rng.hpp"

namespace qlfit {

void MarketSpec::validate() const {
  if (n_stocks < 3) throw std::invalid_argument("market: need at least 3 stocks");
  if (horizon_days < 2) throw std::invalid_argument("market: horizon too short");
  if (!(benchmark_vol > 0.0))
    throw std::invalid_argument("market: benchmark volatility must be positive");
  if (idio_vol < 0.0)
    throw std::invalid_argument("market: idiosyncratic volatility must be nonnegative");
  for (const auto& range : bin_beta_ranges)
    if (!(range[0] <= range[1]))
      throw std::invalid_argument("market: malformed beta range");
  // Ordered, non-overlapping ranges keep the ranked bins recoverable.
  if (!(bin_beta_ranges[0][1] < bin_beta_ranges[1][0] &&
        bin_beta_ranges[1][1] < bin_beta_ranges[2][0]))
    throw std::invalid_argument("market: bin beta ranges must be ordered and disjoint");
}

RiskClassification MarketData::true_classification() const {
  RiskClassification cls;
  cls.scheme = RiskScheme::beta_ranked;
  cls.bins = true_bins;
  cls.betas = true_betas;
  return cls;
}

namespace {

std::string stock_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%03d", index);
  return buf;
}

PriceSeries accumulate_prices(const std::string& name, Date start,
                              const std::vector<double>& returns) {
  PriceSeries series;
  series.stock = name;
  series.observations.reserve(returns.size() + 1);
  double price = 100.0;
  series.observations.push_back({start, price});
  for (size_t t = 0; t < returns.size(); ++t) {
    // Guard against ruinous draws; never triggered at realistic volatilities.
    price *= 1.0 + std::max(returns[t], -0.9);
    series.observations.push_back({start + static_cast<int>(t) + 1, price});
  }
  return series;
}

}  // namespace

MarketData generate_market(const MarketSpec& spec) {
  spec.validate();

  MarketData market;

  Rng bench_rng(derive_seed(spec.seed, 0));
  std::vector<double> bench_returns(static_cast<size_t>(spec.horizon_days));
  for (double& r : bench_returns)
    r = spec.benchmark_drift + spec.benchmark_vol * bench_rng.gaussian();
  market.benchmark = accumulate_prices("INDEX", spec.start_date, bench_returns);

  const auto sizes = balanced_bin_sizes(static_cast<size_t>(spec.n_stocks));
  Rng beta_rng(derive_seed(spec.seed, 1));
  int index = 0;
  for (int bin = 0; bin < 3; ++bin) {
    for (size_t k = 0; k < sizes[static_cast<size_t>(bin)]; ++k, ++index) {
      const std::string name = stock_name(index);
      const auto& range = spec.bin_beta_ranges[static_cast<size_t>(bin)];
      const double beta = beta_rng.uniform(range[0], range[1]);
      market.true_bins[name] = bin;
      market.true_betas[name] = beta;

      Rng idio_rng(derive_seed(spec.seed, 2 + static_cast<uint64_t>(index)));
      std::vector<double> returns(bench_returns.size());
      for (size_t t = 0; t < returns.size(); ++t)
        returns[t] = beta * bench_returns[t] + spec.idio_vol * idio_rng.gaussian();
      market.stocks.push_back(accumulate_prices(name, spec.start_date, returns));
    }
  }
  return market;
}

GeneratedAgent generate_agent_history(const AgentSpec& agent, const MarketData& market,
                                      const RiskClassification& classification) {
  if (agent.n_sells < 1)
    throw std::invalid_argument("agent: n_sells must be >= 1");
  if (agent.hold_days < 1)
    throw std::invalid_argument("agent: hold_days must be >= 1");
  if (agent.trade_volume < 1)
    throw std::invalid_argument("agent: trade_volume must be >= 1");
  // Closure of the model bounds: a beta = 0 agent is the uniform-random
  // player and is a legitimate generator.
  const ModelBounds bounds;
  if (agent.params.alpha < bounds.alpha.lo || agent.params.alpha > bounds.alpha.hi ||
      agent.params.beta_inv_temp < bounds.beta.lo ||
      agent.params.beta_inv_temp > bounds.beta.hi ||
      agent.params.gamma < bounds.gamma.lo || agent.params.gamma > bounds.gamma.hi)
    throw std::invalid_argument("agent: parameters outside model bounds");

  const int days_per_pair = agent.hold_days + 1;
  const size_t needed_days =
      static_cast<size_t>(agent.n_sells) * static_cast<size_t>(days_per_pair);
  if (market.benchmark.observations.size() < needed_days)
    throw std::invalid_argument("agent: market horizon too short for " +
                                std::to_string(agent.n_sells) + " sells");

  // Bin membership restricted to stocks that exist in this market.
  std::array<std::vector<const PriceSeries*>, 3> bin_members;
  for (const PriceSeries& series : market.stocks) {
    const auto it = classification.bins.find(series.stock);
    if (it == classification.bins.end())
      throw std::invalid_argument("agent: stock \"" + series.stock +
                                  "\" has no classification");
    bin_members[static_cast<size_t>(it->second)].push_back(&series);
  }
  for (const auto& members : bin_members)
    if (members.empty())
      throw std::invalid_argument("agent: a risk bin has no tradable stocks");

  GeneratedAgent out;
  Rng rng(agent.seed);
  QTable q;
  Portfolio portfolio;
  std::array<size_t, 3> round_robin{0, 0, 0};

  auto push_tx = [&](Date date, TxKind kind, const std::string& stock, double price) {
    TransactionRecord rec;
    rec.player = agent.player_id;
    rec.tx.date = date;
    rec.tx.kind = kind;
    rec.tx.stock = stock;
    rec.tx.volume = agent.trade_volume;
    rec.tx.price = Decimal::from_double_rounded(price);
    rec.tx.total = Decimal::from_micro(rec.tx.price.micro() * agent.trade_volume);
    out.records.push_back(rec);
    return rec.tx.price.to_double();  // the 6-dp value the ingest side will see
  };

  for (int k = 0; k < agent.n_sells; ++k) {
    const int state = state_of(portfolio.profit);
    const auto probs =
        softmax_probs(q.values[static_cast<size_t>(state)], agent.params.beta_inv_temp);
    const int action = rng.categorical(probs);
    out.actions.push_back(action);
    out.chosen_probs.push_back(probs[static_cast<size_t>(action)]);

    const auto& members = bin_members[static_cast<size_t>(action)];
    size_t pick;
    if (agent.buy_policy == BuyPolicy::uniform_random) {
      pick = static_cast<size_t>(rng.below(members.size()));
    } else {
      pick = round_robin[static_cast<size_t>(action)]++ % members.size();
    }
    const PriceSeries& series = *members[pick];

    const size_t buy_day = static_cast<size_t>(k) * static_cast<size_t>(days_per_pair);
    const size_t sell_day = buy_day + static_cast<size_t>(agent.hold_days);
    const auto& buy_obs = series.observations[buy_day];
    const auto& sell_obs = series.observations[sell_day];

    const double buy_price = push_tx(buy_obs.date, TxKind::buy, series.stock, buy_obs.close);
    portfolio.buy(series.stock, agent.trade_volume, buy_price);

    const double sell_price =
        push_tx(sell_obs.date, TxKind::sell, series.stock, sell_obs.close);
    const auto reward = portfolio.sell(series.stock, agent.trade_volume, sell_price);

    const double squashed = squash(*reward, agent.params.rho);
    portfolio.profit += squashed;
    const int state_next = state_of(portfolio.profit);
    q_update(q, state, action, squashed, state_next, agent.params);
  }

  auto histories = build_histories(out.records);
  out.history = std::move(histories.front());
  return out;
}

}  // namespace qlfit
