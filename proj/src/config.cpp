#include <charconv>
#include <fstream>
#include <stdexcept>

#include "qlfit/csv.hpp"
#include "qlfit/pipeline.hpp"

namespace qlfit {

namespace {

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
    throw std::runtime_error("config: bad number for " + key + ": \"" + value + "\"");
  return out;
}

int64_t to_int(const std::string& key, const std::string& value) {
  int64_t out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
    throw std::runtime_error("config: bad integer for " + key + ": \"" + value + "\"");
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (iequals(value, "true") || value == "1") return true;
  if (iequals(value, "false") || value == "0") return false;
  throw std::runtime_error("config: bad boolean for " + key + ": \"" + value + "\"");
}

RiskScheme to_scheme(const std::string& value) {
  if (iequals(value, "beta")) return RiskScheme::beta_ranked;
  if (iequals(value, "riskiness")) return RiskScheme::riskiness_ranked;
  throw std::runtime_error("config: risk_scheme must be beta or riskiness, got \"" +
                           value + "\"");
}

kernels::KernelChoice to_kernel(const std::string& value) {
  if (iequals(value, "auto")) return kernels::KernelChoice::auto_select;
  if (iequals(value, "scalar")) return kernels::KernelChoice::scalar;
  if (iequals(value, "avx2")) return kernels::KernelChoice::avx2;
  throw std::runtime_error("config: kernel must be auto, scalar, or avx2");
}

BuyPolicy to_buy_policy(const std::string& value) {
  if (iequals(value, "uniform")) return BuyPolicy::uniform_random;
  if (iequals(value, "round_robin")) return BuyPolicy::round_robin;
  throw std::runtime_error("config: buy_policy must be uniform or round_robin");
}

std::string unquote(std::string value) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
    return value.substr(1, value.size() - 2);
  return value;
}

}  // namespace

void apply_config_line(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = unquote(raw);
  if (key == "transactions") c.transactions = value;
  else if (key == "prices") c.prices = value;
  else if (key == "benchmark") c.benchmark = value;
  else if (key == "out") c.out_dir = value;
  else if (key == "min_sells") c.min_sells = static_cast<size_t>(to_int(key, value));
  else if (key == "min_span_days") c.min_span_days = static_cast<int>(to_int(key, value));
  else if (key == "cap") c.cap = static_cast<size_t>(to_int(key, value));
  else if (key == "risk_scheme") c.risk_scheme = to_scheme(value);
  else if (key == "reward_scheme") c.reward_scheme = value;
  else if (key == "lrt_confidence") c.lrt_confidence = to_double(key, value);
  else if (key == "ci_confidence") c.ci_confidence = to_double(key, value);
  else if (key == "chance_threshold") c.chance_threshold = to_double(key, value);
  else if (key == "n_scrambles") c.n_scrambles = static_cast<int>(to_int(key, value));
  else if (key == "seed") c.seed = static_cast<uint64_t>(to_int(key, value));
  else if (key == "threads") c.threads = static_cast<int>(to_int(key, value));
  else if (key == "audit_starts") c.audit_starts = to_bool(key, value);
  else if (key == "kernel") c.fit.kernel = to_kernel(value);
  else if (key == "rho") c.fit.rho = to_double(key, value);
  else if (key == "max_iterations") c.fit.optimizer.max_iterations = static_cast<int>(to_int(key, value));
  else if (key == "sim_agents") c.sim.n_agents = static_cast<int>(to_int(key, value));
  else if (key == "sim_n_sells") c.sim.n_sells = static_cast<int>(to_int(key, value));
  else if (key == "sim_n_sells_min") c.sim.n_sells_min = static_cast<int>(to_int(key, value));
  else if (key == "sim_n_sells_max") c.sim.n_sells_max = static_cast<int>(to_int(key, value));
  else if (key == "sim_alpha") c.sim.alpha = to_double(key, value);
  else if (key == "sim_beta") c.sim.beta = to_double(key, value);
  else if (key == "sim_gamma") c.sim.gamma = to_double(key, value);
  else if (key == "sim_buy_policy") c.sim.buy_policy = to_buy_policy(value);
  else if (key == "sim_trade_volume") c.sim.trade_volume = to_int(key, value);
  else if (key == "sim_hold_days") c.sim.hold_days = static_cast<int>(to_int(key, value));
  else if (key == "sim_initial_cash") c.sim.initial_cash = to_double(key, value);
  else if (key == "sim_stocks") c.sim.market.n_stocks = static_cast<int>(to_int(key, value));
  else if (key == "sim_horizon_days") c.sim.market.horizon_days = static_cast<int>(to_int(key, value));
  else if (key == "sim_benchmark_vol") c.sim.market.benchmark_vol = to_double(key, value);
  else if (key == "sim_benchmark_drift") c.sim.market.benchmark_drift = to_double(key, value);
  else if (key == "sim_idio_vol") c.sim.market.idio_vol = to_double(key, value);
  else throw std::runtime_error("config: unknown key \"" + key + "\"");
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open \"" + path + "\"");
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const size_t eq = view.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               " is not key = value");
    const std::string key{trim(view.substr(0, eq))};
    const std::string value{trim(view.substr(eq + 1))};
    apply_config_line(config, key, value);
  }
}

void RunConfig::validate() const {
  if (!(lrt_confidence > 0.0 && lrt_confidence < 1.0))
    throw std::runtime_error("config: lrt_confidence must be in (0,1)");
  if (!(ci_confidence > 0.0 && ci_confidence < 1.0))
    throw std::runtime_error("config: ci_confidence must be in (0,1)");
  if (n_scrambles < 1) throw std::runtime_error("config: n_scrambles must be >= 1");
  if (min_sells < 1) throw std::runtime_error("config: min_sells must be >= 1");
  if (min_span_days < 0) throw std::runtime_error("config: min_span_days must be >= 0");
  if (cap && *cap < 1) throw std::runtime_error("config: cap must be >= 1");
  if (reward_scheme == "eq4_literal")
    throw std::runtime_error(
        "config: reward scheme \"eq4_literal\" is reserved and not implemented; "
        "use \"cost_basis\"");
  if (reward_scheme != "cost_basis")
    throw std::runtime_error("config: unknown reward scheme \"" + reward_scheme + "\"");
}

}  // namespace qlfit
