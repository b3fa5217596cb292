#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace straddle {

struct LbfgsOptions {
  int max_iter = 100;
  int memory = 10;
  double gtol = 1e-4;   // stop when max |gradient| <= gtol
  double ftol = 2.220446049250313e-09;  // relative objective decrease floor
};

struct LbfgsResult {
  std::vector<double> x;
  /// Objective at the start point and after every accepted step.
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
};

/// Limited-memory BFGS with Armijo backtracking. Every accepted step
/// satisfies the sufficient-decrease condition, so the objective trace is
/// nonincreasing. `fn(x, grad)` returns f(x) and writes the gradient.
template <typename Fn>
LbfgsResult minimize_lbfgs(Fn&& fn, std::vector<double> x, const LbfgsOptions& opt = {}) {
  const std::size_t d = x.size();
  std::vector<double> g(d), g_new(d), dir(d), x_new(d);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  auto dot = [](std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  };
  auto max_abs = [](std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  };

  LbfgsResult res;
  double f = fn(std::span<const double>(x), std::span<double>(g));
  res.objective_trace.push_back(f);

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    if (max_abs(g) <= opt.gtol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion for dir = -H g.
    for (std::size_t j = 0; j < d; ++j) dir[j] = -g[j];
    const std::size_t m = s_hist.size();
    std::vector<double> alpha(m);
    for (std::size_t k = m; k-- > 0;) {
      alpha[k] = rho_hist[k] * dot(s_hist[k], dir);
      for (std::size_t j = 0; j < d; ++j) dir[j] -= alpha[k] * y_hist[k][j];
    }
    if (m > 0) {
      const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
      for (double& v : dir) v *= gamma;
    }
    for (std::size_t k = 0; k < m; ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], dir);
      for (std::size_t j = 0; j < d; ++j) dir[j] += s_hist[k][j] * (alpha[k] - beta);
    }

    double slope = dot(g, dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t j = 0; j < d; ++j) dir[j] = -g[j];
      slope = dot(g, dir);
    }

    double step = m == 0 ? std::min(1.0, 1.0 / std::max(max_abs(g), 1e-12)) : 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t j = 0; j < d; ++j) x_new[j] = x[j] + step * dir[j];
      f_new = fn(std::span<const double>(x_new), std::span<double>(g_new));
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    std::vector<double> s(d), yv(d);
    for (std::size_t j = 0; j < d; ++j) {
      s[j] = x_new[j] - x[j];
      yv[j] = g_new[j] - g[j];
    }
    const double sy = dot(s, yv);
    if (sy > 1e-12) {
      if (int(s_hist.size()) == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
    }

    const double decrease = f - f_new;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    res.objective_trace.push_back(f);
    ++res.iterations;
    if (decrease <= opt.ftol * std::max({std::abs(f), std::abs(f + decrease), 1.0})) {
      res.converged = true;
      break;
    }
  }
  res.x = std::move(x);
  return res;
}

}  // namespace straddle
