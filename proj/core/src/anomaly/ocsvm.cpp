#include "steerlab/anomaly/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace steerlab::anomaly {

namespace {

double rbf(const Vec& a, const Vec& b, double gamma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

double scale_gamma(const std::vector<Vec>& data) {
  const std::size_t d = data.front().size();
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (const auto& row : data) {
    for (double v : row) {
      sum += v;
      sum2 += v * v;
      ++n;
    }
  }
  const double m = sum / static_cast<double>(n);
  const double var = sum2 / static_cast<double>(n) - m * m;
  const double denom = static_cast<double>(d) * std::max(var, 1e-12);
  return 1.0 / denom;
}

}  // namespace

double OneClassSvmModel::decision(const Vec& x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < support_vectors.size(); ++i) {
    acc += coefficients[i] * rbf(support_vectors[i], x, gamma);
  }
  return acc - rho;
}

OneClassSvmModel ocsvm_fit(const std::vector<Vec>& data, const OcsvmParams& params) {
  if (data.empty()) throw std::invalid_argument("ocsvm_fit: empty training data");
  if (params.nu <= 0.0 || params.nu > 1.0) throw std::invalid_argument("ocsvm_fit: nu out of (0,1]");
  const std::size_t n = data.size();
  const std::size_t dims = data.front().size();
  for (const auto& row : data) {
    if (row.size() != dims) throw std::invalid_argument("ocsvm_fit: ragged rows");
  }

  const double gamma = params.gamma > 0.0 ? params.gamma : scale_gamma(data);
  const double c_bound = 1.0 / (params.nu * static_cast<double>(n));

  // full kernel cache; training sets here are at most a few thousand rows
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    q(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = rbf(data[i], data[j], gamma);
      q(i, j) = k;
      q(j, i) = k;
    }
  }

  Vec alpha(n, 1.0 / static_cast<double>(n));
  Vec grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += q(i, j) * alpha[j];
    grad[i] = acc;
  }

  // SMO over most-violating pairs under sum(alpha)=1 and the box [0, C]
  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
    std::size_t up = n, down = n;
    double g_up = 0.0, g_down = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (alpha[k] < c_bound - 1e-15 && (up == n || grad[k] < g_up)) {
        up = k;
        g_up = grad[k];
      }
      if (alpha[k] > 1e-15 && (down == n || grad[k] > g_down)) {
        down = k;
        g_down = grad[k];
      }
    }
    if (up == n || down == n || g_down - g_up < params.tol) break;

    const double curvature = std::max(q(up, up) + q(down, down) - 2.0 * q(up, down), 1e-12);
    double lambda = (g_down - g_up) / curvature;
    lambda = std::min(lambda, c_bound - alpha[up]);
    lambda = std::min(lambda, alpha[down]);
    if (lambda <= 0.0) break;

    alpha[up] += lambda;
    alpha[down] -= lambda;
    for (std::size_t k = 0; k < n; ++k) grad[k] += lambda * (q(k, up) - q(k, down));
  }

  // rho from the margin support vectors; fall back to the KKT midpoint
  double rho_acc = 0.0;
  std::size_t rho_count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (alpha[k] > 1e-12 && alpha[k] < c_bound - 1e-12) {
      rho_acc += grad[k];
      ++rho_count;
    }
  }
  double rho;
  if (rho_count > 0) {
    rho = rho_acc / static_cast<double>(rho_count);
  } else {
    double lo = -1e300, hi = 1e300;
    for (std::size_t k = 0; k < n; ++k) {
      if (alpha[k] > 1e-12) lo = std::max(lo, grad[k]);
      if (alpha[k] < c_bound - 1e-12) hi = std::min(hi, grad[k]);
    }
    rho = 0.5 * (lo + hi);
  }

  OneClassSvmModel model;
  model.gamma = gamma;
  model.nu = params.nu;
  model.rho = rho;
  for (std::size_t k = 0; k < n; ++k) {
    if (alpha[k] > 1e-12) {
      model.support_vectors.push_back(data[k]);
      model.coefficients.push_back(alpha[k]);
    }
  }
  return model;
}

void OneClassSvmModel::to_container(io::Container& c, const std::string& prefix) const {
  const std::size_t n = support_vectors.size();
  const std::size_t d = n > 0 ? support_vectors.front().size() : 0;
  std::vector<double> flat;
  flat.reserve(n * d);
  for (const auto& sv : support_vectors) flat.insert(flat.end(), sv.begin(), sv.end());
  c.put_f64(prefix + ".sv", {n, d}, std::move(flat));
  c.put_f64(prefix + ".coef", {n}, coefficients);
  c.put_scalar(prefix + ".rho", rho);
  c.put_scalar(prefix + ".gamma", gamma);
  c.put_scalar(prefix + ".nu", nu);
}

OneClassSvmModel OneClassSvmModel::from_container(const io::Container& c,
                                                  const std::string& prefix) {
  OneClassSvmModel m;
  const auto& sv = c.get(prefix + ".sv");
  const std::size_t n = static_cast<std::size_t>(sv.dims[0]);
  const std::size_t d = static_cast<std::size_t>(sv.dims[1]);
  for (std::size_t i = 0; i < n; ++i) {
    m.support_vectors.emplace_back(sv.f64.begin() + static_cast<std::ptrdiff_t>(i * d),
                                   sv.f64.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
  }
  m.coefficients = c.get(prefix + ".coef").f64;
  m.rho = c.get_scalar(prefix + ".rho");
  m.gamma = c.get_scalar(prefix + ".gamma");
  m.nu = c.get_scalar(prefix + ".nu");
  return m;
}

}  // namespace steerlab::anomaly
