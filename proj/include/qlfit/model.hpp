#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qlfit/ingest.hpp"
#include "qlfit/kernels/nll_kernel.hpp"
#include "qlfit/risk.hpp"

namespace qlfit {

// One bound of a fitted parameter; open bounds are honored by shrinking the
// working box by a small epsilon.
struct ParamBounds {
  double lo = 0.0;
  double hi = 1.0;
  bool open_lo = false;
  bool open_hi = false;

  static constexpr double kEdgeEpsilon = 1e-6;

  double box_lo() const { return open_lo ? lo + kEdgeEpsilon : lo; }
  double box_hi() const { return open_hi ? hi - kEdgeEpsilon : hi; }
  double clamp(double x) const {
    return std::min(std::max(x, box_lo()), box_hi());
  }
};

struct ModelBounds {
  ParamBounds alpha{1e-4, 2.0, true, true};
  ParamBounds beta{0.0, 50.0, true, true};
  ParamBounds gamma{0.0, 0.9999, false, false};
};

// (alpha, beta, gamma) plus the fixed reward squash scale. gamma pinned to
// zero is the myopic model.
struct ModelParams {
  double alpha = 0.5;
  double beta_inv_temp = 1.0;
  double gamma = 0.0;
  double rho = 500.0;  // GBP; not fitted
};

struct QTable {
  std::array<std::array<double, 3>, 2> values{};  // [state][action], zeros
};

// Reward squashed into (-1, 1): (1 - e^(-r/rho)) / (1 + e^(-r/rho)),
// evaluated as tanh(r / (2 rho)) which is the same function without the
// overflow of the raw exponential form.
inline double squash(double raw_reward, double rho) {
  return std::tanh(raw_reward / (2.0 * rho));
}

// 0 = loss, 1 = win; zero profit counts as a win.
inline int state_of(double profit) { return profit < 0.0 ? 0 : 1; }

// Max-shifted softmax over one Q row; beta = 0 gives (1/3, 1/3, 1/3).
std::array<double, 3> softmax_probs(const std::array<double, 3>& q_row,
                                    double beta_inv_temp);

// Q(s,a) += alpha * (r + gamma * max_b Q(s',b) - Q(s,a)).
void q_update(QTable& q, int state, int action, double squashed_reward,
              int state_next, const ModelParams& params);

struct SellEvent {
  int step = 0;  // 1-based over sells
  int action = 0;
  double raw_reward = 0.0;
  double squashed_reward = 0.0;
  int state_before = 1;
  int state_after = 1;
  double prob = 0.0;  // softmax probability of the taken action
};

struct ReplayResult {
  double nll = 0.0;
  std::vector<SellEvent> events;
};

// Parameter-independent part of the replay; one trace serves every
// parameter vector evaluated against the same history.
kernels::SellTrace build_trace(const PlayerHistory& history,
                               const RiskClassification& classification,
                               double rho);

// Full replay: Buys only feed the portfolio (already folded into the sell
// rewards); each sell contributes -log softmax(Q[state], beta)[bin] and a
// Q update toward reward + gamma * best next-state value.
ReplayResult replay_nll(const PlayerHistory& history,
                        const RiskClassification& classification,
                        const ModelParams& params);

std::string trace_to_json_lines(std::span<const SellEvent> events);

}  // namespace qlfit
