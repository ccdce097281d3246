#include "qlfit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace qlfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> project(std::vector<double> x, const Box& box) {
  for (size_t i = 0; i < x.size(); ++i)
    x[i] = std::min(std::max(x[i], box.lo[i]), box.hi[i]);
  return x;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

class Evaluator {
public:
  Evaluator(const BatchObjective& objective, size_t dim)
      : objective_(objective), dim_(dim) {}

  void eval(const std::vector<std::vector<double>>& points, std::vector<double>& out) {
    flat_.clear();
    for (const auto& p : points) flat_.insert(flat_.end(), p.begin(), p.end());
    out.resize(points.size());
    objective_(flat_.data(), points.size(), dim_, out.data());
    count_ += points.size();
    // NaN -> +inf so comparisons below stay total.
    for (double& f : out)
      if (std::isnan(f)) f = kInf;
  }

  double eval_one(const std::vector<double>& point) {
    std::vector<double> out;
    eval({point}, out);
    return out[0];
  }

  size_t count() const { return count_; }

private:
  const BatchObjective& objective_;
  size_t dim_;
  std::vector<double> flat_;
  size_t count_ = 0;
};

// Central differences, shrinking to one-sided at the box edges.
std::vector<double> fd_gradient(Evaluator& ev, const std::vector<double>& x,
                                double f_x, const Box& box, double step_rel) {
  const size_t dim = x.size();
  std::vector<std::vector<double>> points;
  std::vector<std::pair<double, double>> spans(dim);
  points.reserve(2 * dim);
  for (size_t i = 0; i < dim; ++i) {
    const double h = step_rel * std::max(1.0, std::abs(x[i]));
    const double xp = std::min(x[i] + h, box.hi[i]);
    const double xm = std::max(x[i] - h, box.lo[i]);
    spans[i] = {xp, xm};
    auto plus = x, minus = x;
    plus[i] = xp;
    minus[i] = xm;
    points.push_back(std::move(plus));
    points.push_back(std::move(minus));
  }
  std::vector<double> f;
  ev.eval(points, f);
  std::vector<double> g(dim, 0.0);
  for (size_t i = 0; i < dim; ++i) {
    const auto [xp, xm] = spans[i];
    if (xp == xm) continue;  // degenerate box along this axis
    double fp = f[2 * i], fm = f[2 * i + 1];
    // A non-finite side falls back to the finite one against f(x).
    if (!std::isfinite(fp) && !std::isfinite(fm)) continue;
    if (!std::isfinite(fp)) {
      g[i] = (f_x - fm) / (x[i] - xm);
    } else if (!std::isfinite(fm)) {
      g[i] = (fp - f_x) / (xp - x[i]);
    } else {
      g[i] = (fp - fm) / (xp - xm);
    }
  }
  return g;
}

}  // namespace

MinimizeResult minimize_bounded(const BatchObjective& objective,
                                std::vector<double> x0, const Box& box,
                                const MinimizeOptions& options) {
  const size_t dim = x0.size();
  if (box.lo.size() != dim || box.hi.size() != dim)
    throw std::invalid_argument("minimize_bounded: box/point dimension mismatch");
  for (size_t i = 0; i < dim; ++i)
    if (!(box.lo[i] <= box.hi[i]))
      throw std::invalid_argument("minimize_bounded: empty box");

  Evaluator ev(objective, dim);
  MinimizeResult result;

  std::vector<double> x = project(std::move(x0), box);
  double f_x = ev.eval_one(x);
  result.x = x;
  result.f = f_x;
  if (!std::isfinite(f_x)) {
    result.status = "objective not finite at start";
    result.n_evaluations = ev.count();
    return result;
  }

  auto remember_best = [&](const std::vector<double>& pt, double f) {
    if (f < result.f) {
      result.f = f;
      result.x = pt;
    }
  };

  std::vector<double> g = fd_gradient(ev, x, f_x, box, options.fd_step_rel);
  std::deque<double> recent_f{f_x};
  double bb_step = 1.0;

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    // Projected-gradient stationarity measure.
    std::vector<double> pg(dim);
    {
      auto shifted = x;
      for (size_t i = 0; i < dim; ++i) shifted[i] -= g[i];
      shifted = project(std::move(shifted), box);
      for (size_t i = 0; i < dim; ++i) pg[i] = x[i] - shifted[i];
    }
    if (inf_norm(pg) < options.grad_tol) {
      result.converged = true;
      result.status = "projected gradient below tolerance";
      break;
    }

    // Spectral step direction.
    std::vector<double> d(dim);
    {
      auto target = x;
      for (size_t i = 0; i < dim; ++i) target[i] -= bb_step * g[i];
      target = project(std::move(target), box);
      for (size_t i = 0; i < dim; ++i) d[i] = target[i] - x[i];
    }
    double gd = dot(g, d);
    if (gd >= 0.0) {
      for (size_t i = 0; i < dim; ++i) d[i] = -pg[i];
      gd = dot(g, d);
      if (gd >= 0.0) {
        result.converged = true;
        result.status = "no descent direction";
        break;
      }
    }

    const double f_ref = *std::max_element(recent_f.begin(), recent_f.end());

    // Backtracking with four trial steps per batch; the largest step
    // satisfying the Armijo condition wins, matching sequential halving.
    double accepted_t = 0.0;
    double accepted_f = 0.0;
    std::vector<double> accepted_x;
    double t = 1.0;
    for (int round = 0; round < 8 && accepted_t == 0.0; ++round) {
      std::vector<std::vector<double>> trials;
      std::vector<double> ts;
      for (int j = 0; j < 4; ++j) {
        auto pt = x;
        for (size_t i = 0; i < dim; ++i) pt[i] += t * d[i];
        trials.push_back(std::move(pt));
        ts.push_back(t);
        t *= 0.5;
      }
      std::vector<double> fs;
      ev.eval(trials, fs);
      for (size_t j = 0; j < trials.size(); ++j) {
        remember_best(trials[j], fs[j]);
        if (accepted_t == 0.0 && std::isfinite(fs[j]) &&
            fs[j] <= f_ref + options.armijo_c * ts[j] * gd) {
          accepted_t = ts[j];
          accepted_f = fs[j];
          accepted_x = trials[j];
        }
      }
      t = ts.back() * 0.5;
    }
    if (accepted_t == 0.0) {
      result.converged = true;
      result.status = "line search exhausted";
      break;
    }

    std::vector<double> s(dim), x_new = accepted_x;
    for (size_t i = 0; i < dim; ++i) s[i] = x_new[i] - x[i];

    std::vector<double> g_new = fd_gradient(ev, x_new, accepted_f, box, options.fd_step_rel);
    std::vector<double> y(dim);
    for (size_t i = 0; i < dim; ++i) y[i] = g_new[i] - g[i];
    const double sy = dot(s, y);
    bb_step = sy > 0.0
                  ? std::clamp(dot(s, s) / sy, options.bb_step_min, options.bb_step_max)
                  : options.bb_step_max;

    x = std::move(x_new);
    f_x = accepted_f;
    g = std::move(g_new);
    recent_f.push_back(f_x);
    if (recent_f.size() > static_cast<size_t>(options.nonmonotone_window))
      recent_f.pop_front();

    if (inf_norm(s) < options.step_tol) {
      result.converged = true;
      result.status = "step below tolerance";
      break;
    }
  }

  if (result.status.empty()) {
    result.converged = true;
    result.status = "iteration cap reached";
  }
  result.iterations = it;
  result.n_evaluations = ev.count();
  return result;
}

}  // namespace qlfit
