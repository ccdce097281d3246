#include "qlfit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qlfit/rng.hpp"

namespace qlfit {

const char* model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::random: return "random";
    case ModelKind::myopic: return "myopic";
    case ModelKind::full_rl: return "full";
  }
  return "unknown";
}

int model_param_count(ModelKind kind) {
  switch (kind) {
    case ModelKind::random: return 0;
    case ModelKind::myopic: return 2;
    case ModelKind::full_rl: return 3;
  }
  return 0;
}

double random_nll(int64_t n_sells) {
  if (n_sells < 1)
    throw std::invalid_argument("random_nll: need at least one sell event");
  return static_cast<double>(n_sells) * std::log(3.0);
}

FitResult fit_random(int64_t n_sells) {
  FitResult result;
  result.model = ModelKind::random;
  result.nll = random_nll(n_sells);
  result.n_obs = n_sells;
  result.n_params = 0;
  return result;
}

namespace {

// Dimension 2 = (alpha, beta) with gamma pinned to 0; dimension 3 adds gamma.
BatchObjective make_objective(const kernels::SellTrace& trace,
                              kernels::NllBatchFn kernel) {
  return [&trace, kernel](const double* points, size_t n_points, size_t dim,
                          double* out) {
    std::vector<kernels::ParamPoint> params(n_points);
    for (size_t i = 0; i < n_points; ++i) {
      params[i].alpha = points[i * dim];
      params[i].beta = points[i * dim + 1];
      params[i].gamma = dim > 2 ? points[i * dim + 2] : 0.0;
    }
    kernel(trace, params.data(), n_points, out);
  };
}

std::vector<std::array<double, 3>> entry_grid(const FitConfig& config, bool with_gamma) {
  std::vector<std::array<double, 3>> entries;
  const auto& b = config.bounds;
  const std::vector<double> gammas =
      with_gamma ? config.gamma_grid : std::vector<double>{0.0};
  for (double a : config.alpha_grid)
    for (double be : config.beta_grid)
      for (double ga : gammas)
        entries.push_back({b.alpha.clamp(a), b.beta.clamp(be), b.gamma.clamp(ga)});
  return entries;
}

}  // namespace

FitResult fit_player(const PlayerHistory& history,
                     const RiskClassification& classification, ModelKind model,
                     const FitConfig& config, const FitResult* myopic_hint) {
  if (model == ModelKind::random)
    return fit_random(static_cast<int64_t>(history.sells.size()));
  if (history.sells.empty())
    throw std::runtime_error("fit_player: player \"" + history.player_id +
                             "\" has no sell events");

  const kernels::SellTrace trace = build_trace(history, classification, config.rho);
  const kernels::NllBatchFn kernel = kernels::select_nll_kernel(config.kernel);
  const BatchObjective objective = make_objective(trace, kernel);

  const bool full = model == ModelKind::full_rl;
  const auto& b = config.bounds;
  Box box;
  box.lo = {b.alpha.box_lo(), b.beta.box_lo()};
  box.hi = {b.alpha.box_hi(), b.beta.box_hi()};
  if (full) {
    box.lo.push_back(b.gamma.box_lo());
    box.hi.push_back(b.gamma.box_hi());
  }

  std::vector<std::array<double, 3>> entries = entry_grid(config, full);
  if (full) {
    // The myopic optimum with gamma = 0 joins the start set, so the nested
    // model's likelihood is always attainable.
    FitResult nested;
    if (myopic_hint && myopic_hint->model == ModelKind::myopic &&
        myopic_hint->best_params) {
      nested = *myopic_hint;
    } else {
      nested = fit_player(history, classification, ModelKind::myopic, config);
    }
    entries.push_back({nested.best_params->alpha, nested.best_params->beta_inv_temp, 0.0});
  }

  FitResult result;
  result.model = model;
  result.n_obs = static_cast<int64_t>(history.sells.size());
  result.n_params = model_param_count(model);
  result.nll = std::numeric_limits<double>::infinity();

  for (const auto& entry : entries) {
    std::vector<double> x0{entry[0], entry[1]};
    if (full) x0.push_back(entry[2]);

    const MinimizeResult mr = minimize_bounded(objective, x0, box, config.optimizer);

    StartOutcome outcome;
    outcome.entry = entry;
    outcome.converged = {mr.x[0], mr.x[1], full ? mr.x[2] : 0.0};
    outcome.nll = mr.f;
    outcome.ok = std::isfinite(mr.f);
    outcome.status = mr.status;
    result.starts.push_back(outcome);

    // Deterministic reduction: strict improvement keeps the earliest start.
    if (outcome.ok && outcome.nll < result.nll) {
      result.nll = outcome.nll;
      ModelParams params;
      params.alpha = outcome.converged[0];
      params.beta_inv_temp = outcome.converged[1];
      params.gamma = outcome.converged[2];
      params.rho = config.rho;
      result.best_params = params;
    }
  }

  if (!result.best_params)
    throw std::runtime_error("fit_player: all starts failed for player \"" +
                             history.player_id + "\"");
  return result;
}

ComparisonResult likelihood_ratio_test(const FitResult& nested,
                                       const FitResult& fuller,
                                       double confidence) {
  if (nested.n_params >= fuller.n_params)
    throw std::invalid_argument("likelihood_ratio_test: models are not nested");
  if (nested.n_obs != fuller.n_obs)
    throw std::invalid_argument("likelihood_ratio_test: observation counts differ");

  ComparisonResult cmp;
  cmp.nested = nested.model;
  cmp.fuller = fuller.model;
  cmp.lrt_statistic = std::max(0.0, 2.0 * (nested.nll - fuller.nll));
  cmp.dof = fuller.n_params - nested.n_params;
  cmp.critical_value = chi_square_quantile(confidence, cmp.dof);
  cmp.p_value = chi_square_sf(cmp.lrt_statistic, cmp.dof);
  cmp.significant = cmp.lrt_statistic > cmp.critical_value;
  return cmp;
}

ScrambleOutcome scrambled_experiment(const PlayerHistory& history,
                                     const RiskClassification& ranked,
                                     int n_scrambles, uint64_t seed,
                                     const FitConfig& config,
                                     double ci_confidence) {
  if (n_scrambles < 1)
    throw std::invalid_argument("scrambled_experiment: n_scrambles must be >= 1");

  const FitResult ranked_fit =
      fit_player(history, ranked, ModelKind::myopic, config);
  ScrambleOutcome outcome;
  outcome.ranked_nll = ranked_fit.nll;
  outcome.ranked_bic = bic(ranked_fit.nll, ranked_fit.n_params, ranked_fit.n_obs);

  int64_t successes = 0, trials = 0;
  for (int i = 0; i < n_scrambles; ++i) {
    const RiskClassification scrambled = scramble(ranked, derive_seed(seed, i));
    try {
      const FitResult fit = fit_player(history, scrambled, ModelKind::myopic, config);
      const double scrambled_bic = bic(fit.nll, fit.n_params, fit.n_obs);
      ++trials;
      if (outcome.ranked_bic < scrambled_bic) ++successes;
    } catch (const std::exception& e) {
      ++outcome.failed_scrambles;
      outcome.failures.push_back("scramble " + std::to_string(i) + ": " + e.what());
    }
  }
  if (trials == 0)
    throw std::runtime_error("scrambled_experiment: every scramble fit failed");
  outcome.stat = clopper_pearson(successes, trials, ci_confidence);
  return outcome;
}

VerdictResult population_verdict(std::span<const ComparisonResult> per_player,
                                 double confidence, double chance_threshold) {
  if (per_player.empty())
    throw std::invalid_argument("population_verdict: no players");
  const int64_t successes =
      std::count_if(per_player.begin(), per_player.end(),
                    [](const ComparisonResult& c) { return c.significant; });
  VerdictResult verdict;
  verdict.stat = clopper_pearson(successes, static_cast<int64_t>(per_player.size()),
                                 confidence);
  verdict.threshold = chance_threshold;
  verdict.positive = verdict.stat.low > chance_threshold;
  return verdict;
}

}  // namespace qlfit
