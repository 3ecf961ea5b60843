#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "steerlab/math/matrix.hpp"

namespace steerlab {

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

/// Population standard deviation (divides by n); 0 for a single sample.
inline double stddev_pop(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

/// Nearest-rank quantile of an unsorted sample. q in [0,1]; q=1 gives the max.
inline double quantile(Vec v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  if (q <= 0.0) return v.front();
  const auto n = static_cast<double>(v.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  if (rank == 0) rank = 1;
  if (rank > v.size()) rank = v.size();
  return v[rank - 1];
}

/// Column-wise standardization with frozen statistics. Fitting is explicit;
/// applying an unfitted scaler throws, so inference paths cannot silently
/// recompute statistics from test data.
class Standardizer {
 public:
  Standardizer() = default;

  void fit(const std::vector<Vec>& rows) {
    if (rows.empty()) throw std::invalid_argument("Standardizer::fit: no rows");
    const std::size_t d = rows.front().size();
    mean_.assign(d, 0.0);
    std_.assign(d, 0.0);
    for (const auto& r : rows) {
      if (r.size() != d) throw std::invalid_argument("Standardizer::fit: ragged rows");
      for (std::size_t j = 0; j < d; ++j) mean_[j] += r[j];
    }
    for (auto& m : mean_) m /= static_cast<double>(rows.size());
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < d; ++j) {
        const double c = r[j] - mean_[j];
        std_[j] += c * c;
      }
    }
    for (auto& s : std_) {
      s = std::sqrt(s / static_cast<double>(rows.size()));
      if (s == 0.0) s = 1.0;  // constant columns pass through centered
    }
    fitted_ = true;
  }

  bool fitted() const { return fitted_; }
  std::size_t dim() const { return mean_.size(); }
  const Vec& means() const { return mean_; }
  const Vec& stds() const { return std_; }

  Vec apply(std::span<const double> row) const {
    check();
    if (row.size() != mean_.size()) throw std::invalid_argument("Standardizer::apply: bad width");
    Vec out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean_[j]) / std_[j];
    return out;
  }

  Vec unapply(std::span<const double> row) const {
    check();
    if (row.size() != mean_.size()) throw std::invalid_argument("Standardizer::unapply: bad width");
    Vec out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j] * std_[j] + mean_[j];
    return out;
  }

  void set(Vec means, Vec stds) {
    if (means.size() != stds.size()) throw std::invalid_argument("Standardizer::set: size mismatch");
    mean_ = std::move(means);
    std_ = std::move(stds);
    fitted_ = true;
  }

 private:
  void check() const {
    if (!fitted_) throw std::logic_error("Standardizer used before fit: refusing to derive statistics from inference data");
  }

  Vec mean_, std_;
  bool fitted_ = false;
};

}  // namespace steerlab
