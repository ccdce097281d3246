#include "qlfit/model.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qlfit {

std::array<double, 3> softmax_probs(const std::array<double, 3>& q_row,
                                    double beta_inv_temp) {
  const double m = std::max(q_row[0], std::max(q_row[1], q_row[2]));
  const double e0 = std::exp((q_row[0] - m) * beta_inv_temp);
  const double e1 = std::exp((q_row[1] - m) * beta_inv_temp);
  const double e2 = std::exp((q_row[2] - m) * beta_inv_temp);
  const double z = e0 + e1 + e2;
  return {e0 / z, e1 / z, e2 / z};
}

void q_update(QTable& q, int state, int action, double squashed_reward,
              int state_next, const ModelParams& params) {
  const auto& next_row = q.values[static_cast<size_t>(state_next)];
  const double next_best = std::max(next_row[0], std::max(next_row[1], next_row[2]));
  double& cell = q.values[static_cast<size_t>(state)][static_cast<size_t>(action)];
  const double td_error = squashed_reward + params.gamma * next_best - cell;
  cell += params.alpha * td_error;
}

kernels::SellTrace build_trace(const PlayerHistory& history,
                               const RiskClassification& classification,
                               double rho) {
  kernels::SellTrace trace;
  trace.action.reserve(history.sells.size());
  trace.reward.reserve(history.sells.size());
  trace.state_before.reserve(history.sells.size());
  trace.state_after.reserve(history.sells.size());

  double profit = 0.0;
  for (const SellRecord& sell : history.sells) {
    const Transaction& tx = history.transactions[sell.tx_index];
    const auto bin = classification.bins.find(tx.stock);
    if (bin == classification.bins.end())
      throw std::runtime_error("stock \"" + tx.stock + "\" traded by player \"" +
                               history.player_id + "\" has no risk classification");
    const double squashed = squash(sell.raw_reward, rho);
    trace.action.push_back(static_cast<uint8_t>(bin->second));
    trace.state_before.push_back(static_cast<uint8_t>(state_of(profit)));
    profit += squashed;
    trace.state_after.push_back(static_cast<uint8_t>(state_of(profit)));
    trace.reward.push_back(squashed);
  }
  return trace;
}

ReplayResult replay_nll(const PlayerHistory& history,
                        const RiskClassification& classification,
                        const ModelParams& params) {
  if (history.sells.empty())
    throw std::runtime_error("player \"" + history.player_id +
                             "\" has no sell events; likelihood undefined");

  const kernels::SellTrace trace = build_trace(history, classification, params.rho);

  ReplayResult result;
  result.events.reserve(trace.size());
  QTable q;
  for (size_t t = 0; t < trace.size(); ++t) {
    const int s = trace.state_before[t];
    const int a = trace.action[t];
    const int s_next = trace.state_after[t];

    const auto probs = softmax_probs(q.values[static_cast<size_t>(s)],
                                     params.beta_inv_temp);
    const double p = probs[static_cast<size_t>(a)];
    result.nll -= std::log(p);

    SellEvent event;
    event.step = static_cast<int>(t) + 1;
    event.action = a;
    event.raw_reward = history.sells[t].raw_reward;
    event.squashed_reward = trace.reward[t];
    event.state_before = s;
    event.state_after = s_next;
    event.prob = p;
    result.events.push_back(event);

    q_update(q, s, a, trace.reward[t], s_next, params);
  }
  return result;
}

std::string trace_to_json_lines(std::span<const SellEvent> events) {
  std::string out;
  for (const SellEvent& e : events) {
    nlohmann::json j{{"step", e.step},
                     {"action", e.action},
                     {"raw_reward", e.raw_reward},
                     {"squashed_reward", e.squashed_reward},
                     {"state_before", e.state_before},
                     {"state_after", e.state_after},
                     {"prob", e.prob}};
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace qlfit
