#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "straddle/classifiers/lbfgs.hpp"
#include "straddle/classifiers/matrix.hpp"
#include "straddle/classifiers/standardizer.hpp"

namespace straddle {

struct LogisticParams {
  double C = 1.0;
  int max_iter = 100;  // per epoch
  double tol = 1e-4;
  bool warm_start = true;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(t)) without overflow.
inline double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

/// L2-penalized logistic loss
///   0.5 * w'w + C * sum_i log(1 + exp(-s_i (x_i'w + c))),  s_i in {-1, +1},
/// over theta = (w_1..w_d, c); the intercept is not penalized.
/// Writes the gradient into `grad` and returns the objective.
inline double logistic_objective(std::span<const double> theta, const Matrix& X, std::span<const int> y, double C,
                                 std::span<double> grad) {
  const std::size_t n = X.rows(), d = X.cols();
  double f = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    f += 0.5 * theta[j] * theta[j];
    grad[j] = theta[j];
  }
  grad[d] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = X.row(i);
    double z = theta[d];
    for (std::size_t j = 0; j < d; ++j) z += x[j] * theta[j];
    const double s = y[i] == 1 ? 1.0 : -1.0;
    f += C * softplus(-s * z);
    const double coef = -C * s * sigmoid(-s * z);
    for (std::size_t j = 0; j < d; ++j) grad[j] += coef * x[j];
    grad[d] += coef;
  }
  return f;
}

struct LogisticModel {
  Standardizer scaler;
  std::vector<double> weights;
  double intercept = 0.0;
  /// Objective values across all optimizer steps of the last fit (all epochs).
  std::vector<double> objective_trace;

  double decision(std::span<const double> x) const {
    double z = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * (x[j] - scaler.mean[j]) / scaler.scale[j];
    return z;
  }

  std::vector<double> predict_proba(const Matrix& X) const {
    if (X.cols() != weights.size()) throw std::invalid_argument("logistic: feature arity mismatch");
    std::vector<double> p(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) p[i] = sigmoid(decision(X.row(i)));
    return p;
  }
};

/// Called after each epoch with the model fitted so far.
using LogisticEpochHook = std::function<void(int epoch, const LogisticModel&)>;

/// Fits on standardized features with L-BFGS. Runs `epochs` optimizer
/// segments of `max_iter` iterations each; with `warm` set (and warm_start
/// enabled) the first segment starts from its coefficients.
inline LogisticModel fit_logistic(const Matrix& X, std::span<const int> y, const LogisticParams& params,
                                  const LogisticModel* warm = nullptr, int epochs = 1,
                                  const LogisticEpochHook& hook = {}) {
  const std::size_t d = X.cols();
  LogisticModel model;
  model.scaler = Standardizer::fit(X);
  const Matrix Z = model.scaler.transform(X);

  std::vector<double> theta(d + 1, 0.0);
  if (warm && params.warm_start && warm->weights.size() == d) {
    std::copy(warm->weights.begin(), warm->weights.end(), theta.begin());
    theta[d] = warm->intercept;
  }

  auto fn = [&](std::span<const double> t, std::span<double> g) { return logistic_objective(t, Z, y, params.C, g); };
  LbfgsOptions opt;
  opt.max_iter = params.max_iter;
  opt.gtol = params.tol;
  for (int e = 0; e < std::max(epochs, 1); ++e) {
    auto res = minimize_lbfgs(fn, theta, opt);
    const std::size_t skip = model.objective_trace.empty() ? 0 : 1;  // segment start repeats last value
    model.objective_trace.insert(model.objective_trace.end(), res.objective_trace.begin() + long(skip),
                                 res.objective_trace.end());
    theta = std::move(res.x);
    model.weights.assign(theta.begin(), theta.begin() + long(d));
    model.intercept = theta[d];
    if (hook) hook(e, model);
  }
  return model;
}

}  // namespace straddle
