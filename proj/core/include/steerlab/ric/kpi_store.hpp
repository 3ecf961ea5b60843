#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "steerlab/netsim/types.hpp"

namespace steerlab::ric {

/// Append-only KPI time-series store, keyed by entity, indexed by iteration.
/// Batches are ingested atomically; out-of-order batches are rejected whole.
class KpiStore {
 public:
  /// Returns false and leaves the store untouched if the batch is not newer
  /// than everything already stored or is internally inconsistent.
  bool ingest(const netsim::KpiReportBatch& batch);

  std::int64_t last_iteration() const { return last_iteration_; }
  bool has_iteration(std::int64_t t) const { return t >= 0 && t <= last_iteration_; }

  const std::vector<netsim::UeKpiReport>& ue_series(int ue_id) const;
  const std::vector<netsim::CellKpiReport>& cell_series(const std::string& cell_id) const;

  /// Inclusive timestamp window [t0, t1].
  std::vector<netsim::UeKpiReport> ue_window(int ue_id, std::int64_t t0, std::int64_t t1) const;
  std::vector<netsim::CellKpiReport> cell_window(const std::string& cell_id, std::int64_t t0,
                                                 std::int64_t t1) const;

  const netsim::UeKpiReport* ue_at(int ue_id, std::int64_t t) const;
  const netsim::CellKpiReport* cell_at(const std::string& cell_id, std::int64_t t) const;

  std::vector<int> ue_ids() const;
  std::vector<std::string> cell_ids() const;

 private:
  std::map<int, std::vector<netsim::UeKpiReport>> ue_records_;
  std::map<std::string, std::vector<netsim::CellKpiReport>> cell_records_;
  std::int64_t last_iteration_ = -1;
};

}  // namespace steerlab::ric
