#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "steerlab/math/matrix.hpp"
#include "steerlab/math/stats.hpp"
#include "steerlab/ric/kpi_store.hpp"

namespace steerlab::marrs {

/// The 11 time-series features per cell, fixed order: five cell KPIs followed
/// by six aggregates over the UEs the cell serves.
inline constexpr std::array<const char*, 11> kFeatureNames = {
    "Throughput",  "MeasPeriodPrb", "Number_UEs", "New_UEs",   "Left_UEs",  "ThpDl_Mean",
    "ThpDl_Std",   "Rssnir_Mean",   "Rssnir_Std", "Rsrp_Mean", "Rsrp_Std"};
inline constexpr std::size_t kFeatureCount = kFeatureNames.size();

std::string feature_schema();

struct FeatureRows {
  Matrix values;               // T × 11, raw units
  std::vector<bool> zero_ue;   // rows where the cell served no UE
  std::int64_t start = 0;
};

/// Raw (unstandardized) feature rows for one cell over [t0, t1]. Aggregated
/// UE features over zero served UEs become mean=0, std=0 and are flagged.
FeatureRows raw_feature_rows(const ric::KpiStore& store, const std::string& cell_id,
                             std::int64_t t0, std::int64_t t1);

/// Standardization statistics over every cell's raw rows in [t0, t1].
Standardizer fit_standardizer(const ric::KpiStore& store, const std::vector<std::string>& cells,
                              std::int64_t t0, std::int64_t t1);

struct FeatureWindow {
  std::string cell_id;
  std::int64_t start = 0;      // iteration of the first row
  Matrix values;               // window_len × 11, standardized
  bool has_zero_ue_rows = false;

  std::vector<Vec> rows() const;
  Vec flattened() const;
};

/// Sliding windows (stride 1) of standardized rows. Requires a fitted
/// standardizer; an unfitted one throws, which is what keeps test data from
/// ever leaking into the statistics. Ranges shorter than window_len yield an
/// empty list.
std::vector<FeatureWindow> extract_features(const ric::KpiStore& store, const std::string& cell_id,
                                            std::int64_t t0, std::int64_t t1,
                                            const Standardizer& scaler, std::size_t window_len);

}  // namespace steerlab::marrs
