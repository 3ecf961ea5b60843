#pragma once

#include <cstdint>
#include <vector>

#include "steerlab/io/container.hpp"
#include "steerlab/math/matrix.hpp"

namespace steerlab::anomaly {

struct OcsvmParams {
  double nu = 0.1;       // contamination bound in (0, 1]
  double gamma = 0.0;    // RBF bandwidth; <= 0 means 1 / (n_features * var)
  double tol = 1e-6;
  std::size_t max_iter = 200000;
};

struct OneClassSvmModel {
  std::vector<Vec> support_vectors;
  Vec coefficients;  // alpha_i for each support vector
  double rho = 0.0;
  double gamma = 0.0;
  double nu = 0.0;

  /// Signed decision value: negative marks an outlier.
  double decision(const Vec& x) const;

  void to_container(io::Container& c, const std::string& prefix) const;
  static OneClassSvmModel from_container(const io::Container& c, const std::string& prefix);
};

OneClassSvmModel ocsvm_fit(const std::vector<Vec>& data, const OcsvmParams& params = {});

inline double ocsvm_score(const OneClassSvmModel& model, const Vec& x) {
  return model.decision(x);
}

}  // namespace steerlab::anomaly
