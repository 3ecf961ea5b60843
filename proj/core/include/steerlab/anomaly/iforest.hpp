#pragma once

#include <cstdint>
#include <vector>

#include "steerlab/io/container.hpp"
#include "steerlab/math/matrix.hpp"

namespace steerlab::anomaly {

struct IForestParams {
  std::size_t n_trees = 100;
  std::size_t subsample = 256;
  double contamination = 0.1;
};

struct IsoNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t size = 0;  // samples that reached a leaf
};

struct IsolationForestModel {
  std::vector<std::vector<IsoNode>> trees;
  std::size_t subsample = 0;      // effective subsample per tree
  std::size_t n_features = 0;
  double score_threshold = 0.0;   // (1 - contamination) quantile of training scores
  double contamination = 0.0;

  void to_container(io::Container& c, const std::string& prefix) const;
  static IsolationForestModel from_container(const io::Container& c, const std::string& prefix);
};

/// Average unsuccessful-search path length c(n) used by the score normalizer.
double iforest_c(std::size_t n);

IsolationForestModel iforest_fit(const std::vector<Vec>& data, const IForestParams& params,
                                 std::uint64_t seed);

/// Anomaly score in (0, 1]; higher is more anomalous.
double iforest_score(const IsolationForestModel& model, const Vec& x);

}  // namespace steerlab::anomaly
