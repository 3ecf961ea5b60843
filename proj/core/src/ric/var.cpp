#include "steerlab/ric/var.hpp"

#include <cmath>
#include <cstdio>

namespace steerlab::ric {

// The regression runs on internally standardized series so the conditioning
// of the normal equations does not depend on the units of the inputs (KPIs
// arrive in bps). Coefficients are transformed back to the original units.
VarModel var_fit(const std::vector<Vec>& series, int order) {
  if (order < 1) throw std::invalid_argument("var_fit: order must be >= 1");
  if (series.empty()) throw InsufficientHistory("var_fit: empty series");
  const std::size_t k = series.front().size();
  const std::size_t p = static_cast<std::size_t>(order);
  const std::size_t required = p * k + p + 1;
  if (series.size() < required) {
    throw InsufficientHistory("var_fit: need at least " + std::to_string(required) +
                              " observations, have " + std::to_string(series.size()));
  }
  for (const auto& row : series) {
    if (row.size() != k) throw std::invalid_argument("var_fit: ragged series");
  }

  Vec mu(k, 0.0), sigma(k, 0.0);
  for (const auto& row : series) {
    for (std::size_t j = 0; j < k; ++j) mu[j] += row[j];
  }
  for (auto& m : mu) m /= static_cast<double>(series.size());
  for (const auto& row : series) {
    for (std::size_t j = 0; j < k; ++j) {
      const double c = row[j] - mu[j];
      sigma[j] += c * c;
    }
  }
  for (auto& s : sigma) {
    s = std::sqrt(s / static_cast<double>(series.size()));
    if (s == 0.0 || !std::isfinite(s)) s = 1.0;
  }

  std::vector<Vec> z(series.size(), Vec(k));
  for (std::size_t t = 0; t < series.size(); ++t) {
    for (std::size_t j = 0; j < k; ++j) z[t][j] = (series[t][j] - mu[j]) / sigma[j];
  }

  const std::size_t n_rows = series.size() - p;
  const std::size_t n_cols = 1 + p * k;  // intercept + p lags

  Matrix x(n_rows, n_cols);
  Matrix y(n_rows, k);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t t = r + p;
    x(r, 0) = 1.0;
    for (std::size_t lag = 1; lag <= p; ++lag) {
      for (std::size_t j = 0; j < k; ++j) x(r, 1 + (lag - 1) * k + j) = z[t - lag][j];
    }
    for (std::size_t j = 0; j < k; ++j) y(r, j) = z[t][j];
  }

  Matrix xtx(n_cols, n_cols);
  for (std::size_t a = 0; a < n_cols; ++a) {
    for (std::size_t b = a; b < n_cols; ++b) {
      double acc = 0.0;
      for (std::size_t r = 0; r < n_rows; ++r) acc += x(r, a) * x(r, b);
      xtx(a, b) = acc;
      xtx(b, a) = acc;
    }
  }

  Matrix beta(n_cols, k);  // standardized-space coefficients
  bool ridge = false;
  for (std::size_t j = 0; j < k; ++j) {
    Vec xty(n_cols, 0.0);
    for (std::size_t r = 0; r < n_rows; ++r) {
      for (std::size_t a = 0; a < n_cols; ++a) xty[a] += x(r, a) * y(r, j);
    }
    Vec sol;
    if (!solve_linear(xtx, xty, sol)) {
      ridge = true;
      Matrix reg = xtx;
      for (std::size_t a = 0; a < n_cols; ++a) reg(a, a) += 1e-6;
      if (!solve_linear(reg, xty, sol)) {
        throw std::runtime_error("var_fit: regression matrix unusable even with ridge");
      }
    }
    for (std::size_t a = 0; a < n_cols; ++a) beta(a, j) = sol[a];
  }
  if (ridge) {
    static bool warned = false;
    if (!warned) {
      std::fprintf(stderr,
                   "warning: var_fit hit a singular regression matrix, using ridge fallback\n");
      warned = true;
    }
  }

  VarModel model;
  model.order = order;
  model.dim = k;
  model.ridge_fallback = ridge;
  model.intercept.assign(k, 0.0);
  model.coeffs.assign(p, Matrix(k, k));

  // back to original units: A[j][i] = A_z[j][i] * sigma_j / sigma_i,
  // c_j = mu_j + sigma_j * c_z[j] - sum_lag sum_i A[lag][j][i] * mu_i
  for (std::size_t j = 0; j < k; ++j) {
    double c = mu[j] + sigma[j] * beta(0, j);
    for (std::size_t lag = 0; lag < p; ++lag) {
      for (std::size_t i = 0; i < k; ++i) {
        const double a = beta(1 + lag * k + i, j) * sigma[j] / sigma[i];
        model.coeffs[lag](j, i) = a;
        c -= a * mu[i];
      }
    }
    model.intercept[j] = c;
  }

  double rss = 0.0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t t = r + p;
    for (std::size_t j = 0; j < k; ++j) {
      double pred = model.intercept[j];
      for (std::size_t lag = 1; lag <= p; ++lag) {
        for (std::size_t i = 0; i < k; ++i) pred += model.coeffs[lag - 1](j, i) * series[t - lag][i];
      }
      const double e = series[t][j] - pred;
      rss += e * e;
    }
  }
  model.residual_variance = rss / static_cast<double>(n_rows * k);
  return model;
}

Vec VarModel::forecast(std::span<const Vec> recent, int horizon) const {
  const std::size_t p = static_cast<std::size_t>(order);
  if (recent.size() < p) throw InsufficientHistory("VarModel::forecast: window shorter than order");
  if (horizon <= 0) return recent.back();

  std::vector<Vec> tail(recent.end() - static_cast<std::ptrdiff_t>(p), recent.end());
  for (int h = 0; h < horizon; ++h) {
    Vec next = intercept;
    for (std::size_t lag = 0; lag < p; ++lag) {
      const Vec& src = tail[tail.size() - 1 - lag];
      for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < dim; ++i) next[j] += coeffs[lag](j, i) * src[i];
      }
    }
    tail.erase(tail.begin());
    tail.push_back(std::move(next));
  }
  return tail.back();
}

}  // namespace steerlab::ric
