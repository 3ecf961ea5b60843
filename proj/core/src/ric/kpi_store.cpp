#include "steerlab/ric/kpi_store.hpp"

#include <algorithm>
#include <stdexcept>

namespace steerlab::ric {

bool KpiStore::ingest(const netsim::KpiReportBatch& batch) {
  if (batch.iteration <= last_iteration_) return false;
  for (const auto& r : batch.ue_reports) {
    if (r.timestamp != batch.iteration) return false;
  }
  for (const auto& r : batch.cell_reports) {
    if (r.timestamp != batch.iteration) return false;
  }
  for (const auto& r : batch.ue_reports) ue_records_[r.ue_id].push_back(r);
  for (const auto& r : batch.cell_reports) cell_records_[r.cell_id].push_back(r);
  last_iteration_ = batch.iteration;
  return true;
}

const std::vector<netsim::UeKpiReport>& KpiStore::ue_series(int ue_id) const {
  static const std::vector<netsim::UeKpiReport> empty;
  auto it = ue_records_.find(ue_id);
  return it == ue_records_.end() ? empty : it->second;
}

const std::vector<netsim::CellKpiReport>& KpiStore::cell_series(const std::string& cell_id) const {
  static const std::vector<netsim::CellKpiReport> empty;
  auto it = cell_records_.find(cell_id);
  return it == cell_records_.end() ? empty : it->second;
}

namespace {

template <typename T>
std::vector<T> window_of(const std::vector<T>& series, std::int64_t t0, std::int64_t t1) {
  auto lo = std::lower_bound(series.begin(), series.end(), t0,
                             [](const T& r, std::int64_t t) { return r.timestamp < t; });
  auto hi = std::upper_bound(series.begin(), series.end(), t1,
                             [](std::int64_t t, const T& r) { return t < r.timestamp; });
  return std::vector<T>(lo, hi);
}

template <typename T>
const T* at_of(const std::vector<T>& series, std::int64_t t) {
  auto it = std::lower_bound(series.begin(), series.end(), t,
                             [](const T& r, std::int64_t tt) { return r.timestamp < tt; });
  if (it == series.end() || it->timestamp != t) return nullptr;
  return &*it;
}

}  // namespace

std::vector<netsim::UeKpiReport> KpiStore::ue_window(int ue_id, std::int64_t t0,
                                                     std::int64_t t1) const {
  return window_of(ue_series(ue_id), t0, t1);
}

std::vector<netsim::CellKpiReport> KpiStore::cell_window(const std::string& cell_id,
                                                         std::int64_t t0, std::int64_t t1) const {
  return window_of(cell_series(cell_id), t0, t1);
}

const netsim::UeKpiReport* KpiStore::ue_at(int ue_id, std::int64_t t) const {
  return at_of(ue_series(ue_id), t);
}

const netsim::CellKpiReport* KpiStore::cell_at(const std::string& cell_id, std::int64_t t) const {
  return at_of(cell_series(cell_id), t);
}

std::vector<int> KpiStore::ue_ids() const {
  std::vector<int> out;
  out.reserve(ue_records_.size());
  for (const auto& [id, _] : ue_records_) out.push_back(id);
  return out;
}

std::vector<std::string> KpiStore::cell_ids() const {
  std::vector<std::string> out;
  out.reserve(cell_records_.size());
  for (const auto& [id, _] : cell_records_) out.push_back(id);
  return out;
}

}  // namespace steerlab::ric
