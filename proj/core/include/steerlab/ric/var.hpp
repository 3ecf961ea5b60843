#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "steerlab/math/matrix.hpp"

namespace steerlab::ric {

struct InsufficientHistory : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Vector autoregression of order p fitted by ordinary least squares.
struct VarModel {
  int order = 0;
  std::size_t dim = 0;
  Vec intercept;               // k
  std::vector<Matrix> coeffs;  // p matrices, each k×k
  double residual_variance = 0.0;
  bool ridge_fallback = false;

  /// Iterated h-step forecast from the tail of `recent` (h=0 returns the
  /// last observation). Requires recent.size() >= order.
  Vec forecast(std::span<const Vec> recent, int horizon) const;
};

/// Fits a VAR(p). Requires series.size() >= p*k + p + 1 so the regression is
/// at least determined; a singular normal matrix falls back to ridge
/// (lambda = 1e-6) with a one-time warning on stderr.
VarModel var_fit(const std::vector<Vec>& series, int order);

}  // namespace steerlab::ric
