#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "straddle/classifiers/matrix.hpp"
#include "straddle/classifiers/standardizer.hpp"

namespace straddle {

struct SvcParams {
  double C = 1.0;
  std::optional<double> gamma;  // empty: 1 / (n_features * var(X_train))
  double tol = 1e-3;
  int max_passes = 10000;  // iteration cap = max_passes * n_samples
};

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return std::exp(-gamma * s);
}

/// Sigmoid calibration P(1 | f) = 1 / (1 + exp(a f + b)).
struct SigmoidCalibration {
  double a = 0.0;
  double b = 0.0;

  double operator()(double f) const {
    const double t = a * f + b;
    return t >= 0.0 ? std::exp(-t) / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t));
  }

  /// Newton fit with backtracking on smoothed targets (Lin, Lin & Weng's
  /// formulation of Platt's method).
  static SigmoidCalibration fit(std::span<const double> dec, std::span<const int> y) {
    const std::size_t n = dec.size();
    double prior1 = 0, prior0 = 0;
    for (int v : y) (v == 1 ? prior1 : prior0) += 1.0;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0), lo = 1.0 / (prior0 + 2.0);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = y[i] == 1 ? hi : lo;

    auto objective = [&](double A, double B) {
      double f = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double z = dec[i] * A + B;
        f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
      }
      return f;
    };

    double A = 0.0, B = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = objective(A, B);
    constexpr double sigma = 1e-12, min_step = 1e-10, eps = 1e-5;
    for (int it = 0; it < 100; ++it) {
      double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double z = dec[i] * A + B;
        double p, q;
        if (z >= 0) {
          p = std::exp(-z) / (1.0 + std::exp(-z));
          q = 1.0 / (1.0 + std::exp(-z));
        } else {
          p = 1.0 / (1.0 + std::exp(z));
          q = std::exp(z) / (1.0 + std::exp(z));
        }
        const double d2 = p * q;
        h11 += dec[i] * dec[i] * d2;
        h22 += d2;
        h21 += dec[i] * d2;
        const double d1 = t[i] - p;
        g1 += dec[i] * d1;
        g2 += d1;
      }
      if (std::abs(g1) < eps && std::abs(g2) < eps) break;
      const double det = h11 * h22 - h21 * h21;
      const double dA = -(h22 * g1 - h21 * g2) / det;
      const double dB = -(-h21 * g1 + h11 * g2) / det;
      const double gd = g1 * dA + g2 * dB;
      double step = 1.0;
      while (step >= min_step) {
        const double nA = A + step * dA, nB = B + step * dB;
        const double nf = objective(nA, nB);
        if (nf < fval + 0.0001 * step * gd) {
          A = nA;
          B = nB;
          fval = nf;
          break;
        }
        step /= 2.0;
      }
      if (step < min_step) break;
    }
    return {A, B};
  }
};

struct SvcModel {
  Standardizer scaler;
  double gamma = 1.0;
  Matrix support;             // standardized support vectors
  std::vector<double> coef;   // alpha_i * y_i for each support vector
  double rho = 0.0;           // f(x) = sum coef_i K(sv_i, x) - rho
  SigmoidCalibration calibration;
  int iterations = 0;
  bool converged = false;

  double decision_standardized(std::span<const double> z) const {
    double f = -rho;
    for (std::size_t s = 0; s < support.rows(); ++s) f += coef[s] * rbf_kernel(support.row(s), z, gamma);
    return f;
  }

  double decision(std::span<const double> raw) const {
    std::vector<double> z(raw.size());
    scaler.apply_row(raw, z);
    return decision_standardized(z);
  }

  std::vector<double> predict_proba(const Matrix& X) const {
    if (X.cols() != scaler.mean.size()) throw std::invalid_argument("svc: feature arity mismatch");
    std::vector<double> p(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) p[i] = calibration(decision(X.row(i)));
    return p;
  }
};

/// C-SVC with RBF kernel on standardized features, solved by SMO with
/// second-order working-set selection.
inline SvcModel fit_svc(const Matrix& X, std::span<const int> labels, const SvcParams& params) {
  const std::size_t n = X.rows(), d = X.cols();
  SvcModel m;
  m.scaler = Standardizer::fit(X);
  const Matrix Z = m.scaler.transform(X);

  if (params.gamma) {
    m.gamma = *params.gamma;
  } else {
    double mean = 0.0;
    for (double v : Z.data()) mean += v;
    mean /= double(Z.data().size());
    double var = 0.0;
    for (double v : Z.data()) var += (v - mean) * (v - mean);
    var /= double(Z.data().size());
    m.gamma = var > 0.0 ? 1.0 / (double(d) * var) : 1.0;
  }

  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    K[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) K[i * n + j] = K[j * n + i] = rbf_kernel(Z.row(i), Z.row(j), m.gamma);
  }

  std::vector<double> y(n), alpha(n, 0.0), G(n, -1.0);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[i] == 1 ? 1.0 : -1.0;
  const double C = params.C;
  constexpr double tau = 1e-12;
  auto upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  const long long cap = (long long)params.max_passes * (long long)std::max<std::size_t>(n, 1);
  long long iter = 0;
  for (; iter < cap; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity(), gmax2 = -std::numeric_limits<double>::infinity();
    long long ii = -1, jj = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!upper(t) && -G[t] >= gmax) gmax = -G[t], ii = (long long)t;
      } else {
        if (!lower(t) && G[t] >= gmax) gmax = G[t], ii = (long long)t;
      }
    }
    if (ii < 0) {
      m.converged = true;
      break;
    }
    const std::size_t i = std::size_t(ii);
    const double* Ki = &K[i * n];
    double obj_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (y[j] > 0) {
        if (lower(j)) continue;
        const double diff = gmax + G[j];
        gmax2 = std::max(gmax2, G[j]);
        if (diff > 0) {
          double quad = 2.0 - 2.0 * y[i] * y[j] * y[i] * Ki[j];  // Q_ii + Q_jj - 2 y_i Q_ij
          quad = quad > 0 ? quad : tau;
          const double obj = -(diff * diff) / quad;
          if (obj <= obj_min) obj_min = obj, jj = (long long)j;
        }
      } else {
        if (upper(j)) continue;
        const double diff = gmax - G[j];
        gmax2 = std::max(gmax2, -G[j]);
        if (diff > 0) {
          double quad = 2.0 + 2.0 * y[i] * y[j] * y[i] * Ki[j];
          quad = quad > 0 ? quad : tau;
          const double obj = -(diff * diff) / quad;
          if (obj <= obj_min) obj_min = obj, jj = (long long)j;
        }
      }
    }
    if (gmax + gmax2 < params.tol || jj < 0) {
      m.converged = true;
      break;
    }
    const std::size_t j = std::size_t(jj);
    const double* Kj = &K[j * n];
    const double Qij = y[i] * y[j] * Ki[j];
    const double ai = alpha[i], aj = alpha[j];

    if (y[i] != y[j]) {
      double quad = 2.0 + 2.0 * Qij;
      if (quad <= 0) quad = tau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = diff;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = C - diff;
      } else {
        if (alpha[j] > C) alpha[j] = C, alpha[i] = C + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * Qij;
      if (quad <= 0) quad = tau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = sum - C;
      } else {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) alpha[j] = C, alpha[i] = sum - C;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - ai, daj = alpha[j] - aj;
    for (std::size_t k = 0; k < n; ++k) G[k] += y[i] * y[k] * Ki[k] * dai + y[j] * y[k] * Kj[k] * daj;
  }
  m.iterations = int(std::min<long long>(iter, std::numeric_limits<int>::max()));

  // rho: mean of y_i G_i over free vectors, else midpoint of the feasible range.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity(), sum_free = 0;
  int n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yG = y[t] * G[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yG); else lb = std::max(lb, yG);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yG); else lb = std::max(lb, yG);
    } else {
      ++n_free;
      sum_free += yG;
    }
  }
  m.rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2.0;

  std::size_t n_sv = 0;
  for (double a : alpha) n_sv += a > 0.0;
  m.support = Matrix(n_sv, d);
  m.coef.reserve(n_sv);
  for (std::size_t t = 0, s = 0; t < n; ++t) {
    if (!(alpha[t] > 0.0)) continue;
    std::copy(Z.row(t).begin(), Z.row(t).end(), m.support.row(s++).begin());
    m.coef.push_back(alpha[t] * y[t]);
  }

  std::vector<double> train_dec(n);
  for (std::size_t i = 0; i < n; ++i) {
    double f = -m.rho;
    for (std::size_t t = 0; t < n; ++t)
      if (alpha[t] > 0.0) f += alpha[t] * y[t] * K[i * n + t];
    train_dec[i] = f;
  }
  m.calibration = SigmoidCalibration::fit(train_dec, labels);
  return m;
}

}  // namespace straddle
