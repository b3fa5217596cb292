#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "straddle/classifiers/matrix.hpp"

namespace straddle {

/// Per-feature zero-mean / unit-variance scaling fitted on training rows.
/// Constant features get scale 1 (they map to 0).
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Matrix& X) {
    Standardizer s;
    const std::size_t n = X.rows(), d = X.cols();
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += X(i, j);
    for (double& m : s.mean) m /= double(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double c = X(i, j) - s.mean[j];
        s.scale[j] += c * c;
      }
    for (double& v : s.scale) {
      v = std::sqrt(v / double(n));
      if (!(v > 0.0)) v = 1.0;
    }
    return s;
  }

  void apply_row(std::span<const double> in, std::span<double> out) const {
    if (in.size() != mean.size()) throw std::invalid_argument("Standardizer: feature arity mismatch");
    for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - mean[j]) / scale[j];
  }

  Matrix transform(const Matrix& X) const {
    Matrix out(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i) apply_row(X.row(i), out.row(i));
    return out;
  }
};

}  // namespace straddle
