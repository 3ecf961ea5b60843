#pragma once

#include <optional>
#include <string>
#include <vector>

#include "steerlab/anomaly/iforest.hpp"
#include "steerlab/config.hpp"
#include "steerlab/netsim/types.hpp"
#include "steerlab/ric/kpi_store.hpp"
#include "steerlab/ric/var.hpp"

namespace steerlab::ric {

struct A1Policy {
  double handover_margin = 0.0;  // QoE units, same scale as QP forecasts
  std::int64_t min_history = 20;
};

struct QoeForecast {
  int ue_id = 0;
  std::string candidate_cell;
  int horizon = 1;
  double value = 0.0;  // bps-equivalent QoE
};

/// Feature vector the AD xApp scores per UE: dl throughput, dl PRB ratio,
/// RSRP, RSRQ, SNIR.
Vec ad_ue_features(const netsim::UeKpiReport& report);

/// Fits the AD isolation forest on every UE sample in iterations [0, t_end).
anomaly::IsolationForestModel ad_fit(const KpiStore& store, const AdConfig& cfg,
                                     std::int64_t t_end, std::uint64_t seed);

/// UEs at iteration t whose anomaly score exceeds the model threshold,
/// ascending by id. Throws std::out_of_range if t is absent from the store.
std::vector<int> ad_detect(const KpiStore& store, const anomaly::IsolationForestModel& model,
                           std::int64_t t);

/// QoE-prediction xApp: per-UE bivariate VAR forecasts over the UE's own
/// downlink throughput and a cell's reported per-UE aggregate throughput.
class QpService {
 public:
  QpService(const RicConfig& cfg, const RadioConfig& radio,
            const std::vector<CellConfig>& cells);

  /// Joint (ue throughput, cell aggregate throughput) series ending at t.
  std::vector<Vec> joint_series(const KpiStore& store, int ue_id, const std::string& cell_id,
                                std::int64_t t) const;

  std::optional<VarModel> fit(const KpiStore& store, int ue_id, const std::string& cell_id,
                              std::int64_t t) const;

  /// Forecast QoE on the serving cell: the UE-throughput component.
  std::optional<QoeForecast> serving_qoe(const KpiStore& store, int ue_id,
                                         const std::string& serving_cell, std::int64_t t) const;

  /// Forecast QoE on a candidate cell: the cell-aggregate component scaled by
  /// the UE's linear RSRP gap, clamped to [0, 2].
  std::optional<QoeForecast> candidate_qoe(const KpiStore& store, int ue_id,
                                           const std::string& candidate_cell,
                                           const std::string& serving_cell,
                                           std::int64_t t) const;

  /// Cells within the configured RSRP window of the serving cell at the UE's
  /// reported position (planning-model RSRP, no shadowing), excluding the
  /// serving cell itself. Ascending by cell id.
  std::vector<std::string> neighbor_set(const KpiStore& store, int ue_id,
                                        const std::string& serving_cell, std::int64_t t) const;

  /// Planning-model RSRP for an arbitrary position, used for the neighbor set
  /// and the candidate scaling factor.
  double planning_rsrp_dbm(const std::string& cell_id, double x, double y) const;

  double rsrp_gap_factor(int ue_id, const KpiStore& store, const std::string& candidate_cell,
                         const std::string& serving_cell, std::int64_t t) const;

 private:
  RicConfig cfg_;
  RadioConfig radio_;
  std::vector<CellConfig> cells_;
};

/// Traffic-steering decision: hand over to the best neighbor forecast iff it
/// strictly exceeds serving + margin; ties stay; ties between neighbors go to
/// the lowest cell id.
std::optional<netsim::HandoverRequest> ts_decide(const QoeForecast& serving,
                                                 const std::vector<QoeForecast>& neighbors,
                                                 const A1Policy& policy, std::int64_t t);

}  // namespace steerlab::ric
