#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlfit/ingest.hpp"
#include "qlfit/kernels/nll_kernel.hpp"
#include "qlfit/model.hpp"
#include "qlfit/optimizer.hpp"
#include "qlfit/risk.hpp"
#include "qlfit/stats.hpp"

namespace qlfit {

enum class ModelKind { random, myopic, full_rl };

const char* model_name(ModelKind kind);
int model_param_count(ModelKind kind);

struct FitConfig {
  ModelBounds bounds;
  // Entry-point grid; values outside open bounds get clamped inward.
  std::vector<double> alpha_grid{0.0, 0.5, 2.0};
  std::vector<double> beta_grid{0.0, 25.0, 50.0};
  std::vector<double> gamma_grid{0.0, 0.5, 0.9999};
  double rho = 500.0;
  MinimizeOptions optimizer;
  kernels::KernelChoice kernel = kernels::KernelChoice::auto_select;
};

struct StartOutcome {
  std::array<double, 3> entry{};      // (alpha, beta, gamma)
  std::array<double, 3> converged{};  // best point from this start
  double nll = 0.0;
  bool ok = false;
  std::string status;
};

struct FitResult {
  ModelKind model = ModelKind::random;
  std::optional<ModelParams> best_params;  // absent for the random model
  double nll = 0.0;
  int64_t n_obs = 0;  // number of sell events
  int n_params = 0;
  std::vector<StartOutcome> starts;
};

// n_sells * ln 3: every choice has probability 1/3 under the random model.
double random_nll(int64_t n_sells);

FitResult fit_random(int64_t n_sells);

// Multi-start bounded minimization of the replay NLL. Myopic pins gamma = 0
// and uses the alpha x beta grid (9 starts); the full model uses all 27 and
// additionally starts from the myopic optimum, which guarantees
// full NLL <= myopic NLL. `myopic_hint` skips refitting the nested model
// when the caller already has it.
FitResult fit_player(const PlayerHistory& history,
                     const RiskClassification& classification, ModelKind model,
                     const FitConfig& config,
                     const FitResult* myopic_hint = nullptr);

struct ComparisonResult {
  ModelKind nested = ModelKind::random;
  ModelKind fuller = ModelKind::myopic;
  double lrt_statistic = 0.0;  // 2 * (nll_nested - nll_fuller), clipped at 0
  int dof = 0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

ComparisonResult likelihood_ratio_test(const FitResult& nested,
                                       const FitResult& fuller,
                                       double confidence);

struct ScrambleOutcome {
  PopulationStat stat;       // successes = scrambles the ranked bins beat
  double ranked_nll = 0.0;
  double ranked_bic = 0.0;
  int64_t failed_scrambles = 0;
  std::vector<std::string> failures;
};

// Fits the myopic model on the ranked classification and on n_scrambles
// scrambled ones (seeds derived from `seed` by counter); success means
// BIC_ranked < BIC_scrambled strictly. Failed scramble fits are dropped
// from the trial count.
ScrambleOutcome scrambled_experiment(const PlayerHistory& history,
                                     const RiskClassification& ranked,
                                     int n_scrambles, uint64_t seed,
                                     const FitConfig& config,
                                     double ci_confidence);

struct VerdictResult {
  PopulationStat stat;
  double threshold = 0.5;
  bool positive = false;  // interval lower bound above the threshold
};

VerdictResult population_verdict(std::span<const ComparisonResult> per_player,
                                 double confidence, double chance_threshold);

}  // namespace qlfit
