#include "steerlab/ric/xapps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "steerlab/netsim/netsim.hpp"

namespace steerlab::ric {

Vec ad_ue_features(const netsim::UeKpiReport& r) {
  return {r.pdcp_thp_dl, r.prb_ratio_dl, r.rsrp_dbm, r.rsrq_db, r.snir_db};
}

anomaly::IsolationForestModel ad_fit(const KpiStore& store, const AdConfig& cfg,
                                     std::int64_t t_end, std::uint64_t seed) {
  std::vector<Vec> rows;
  for (int ue : store.ue_ids()) {
    for (const auto& rep : store.ue_window(ue, 0, t_end - 1)) rows.push_back(ad_ue_features(rep));
  }
  anomaly::IForestParams params{cfg.n_trees, cfg.subsample, cfg.contamination};
  return anomaly::iforest_fit(rows, params, derive_seed(seed, 0x61645f74ULL));
}

std::vector<int> ad_detect(const KpiStore& store, const anomaly::IsolationForestModel& model,
                           std::int64_t t) {
  if (!store.has_iteration(t)) throw std::out_of_range("ad_detect: iteration absent from store");
  std::vector<int> flagged;
  for (int ue : store.ue_ids()) {
    const auto* rep = store.ue_at(ue, t);
    if (rep == nullptr) continue;
    if (anomaly::iforest_score(model, ad_ue_features(*rep)) > model.score_threshold) {
      flagged.push_back(ue);
    }
  }
  return flagged;  // ue_ids() is ordered, so flagged is ascending
}

QpService::QpService(const RicConfig& cfg, const RadioConfig& radio,
                     const std::vector<CellConfig>& cells)
    : cfg_(cfg), radio_(radio), cells_(cells) {}

std::vector<Vec> QpService::joint_series(const KpiStore& store, int ue_id,
                                         const std::string& cell_id, std::int64_t t) const {
  const std::int64_t t0 = std::max<std::int64_t>(0, t - cfg_.fit_window + 1);
  const auto ue_reports = store.ue_window(ue_id, t0, t);
  const auto cell_reports = store.cell_window(cell_id, t0, t);
  const std::size_t n = std::min(ue_reports.size(), cell_reports.size());
  std::vector<Vec> series;
  series.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ur = ue_reports[ue_reports.size() - n + i];
    const auto& cr = cell_reports[cell_reports.size() - n + i];
    const double agg = cr.throughput_bps / std::max(1, cr.num_ues);
    series.push_back({ur.pdcp_thp_dl, agg});
  }
  return series;
}

std::optional<VarModel> QpService::fit(const KpiStore& store, int ue_id,
                                       const std::string& cell_id, std::int64_t t) const {
  const auto series = joint_series(store, ue_id, cell_id, t);
  if (static_cast<std::int64_t>(series.size()) < cfg_.min_history) return std::nullopt;
  try {
    return var_fit(series, cfg_.var_order);
  } catch (const InsufficientHistory&) {
    return std::nullopt;
  }
}

std::optional<QoeForecast> QpService::serving_qoe(const KpiStore& store, int ue_id,
                                                  const std::string& serving_cell,
                                                  std::int64_t t) const {
  const auto model = fit(store, ue_id, serving_cell, t);
  if (!model) return std::nullopt;
  const auto series = joint_series(store, ue_id, serving_cell, t);
  const Vec f = model->forecast(series, cfg_.forecast_horizon);
  QoeForecast out;
  out.ue_id = ue_id;
  out.candidate_cell = serving_cell;
  out.horizon = cfg_.forecast_horizon;
  out.value = f[0];
  return out;
}

std::optional<QoeForecast> QpService::candidate_qoe(const KpiStore& store, int ue_id,
                                                    const std::string& candidate_cell,
                                                    const std::string& serving_cell,
                                                    std::int64_t t) const {
  const auto model = fit(store, ue_id, candidate_cell, t);
  if (!model) return std::nullopt;
  const auto series = joint_series(store, ue_id, candidate_cell, t);
  const Vec f = model->forecast(series, cfg_.forecast_horizon);
  QoeForecast out;
  out.ue_id = ue_id;
  out.candidate_cell = candidate_cell;
  out.horizon = cfg_.forecast_horizon;
  out.value = f[1] * rsrp_gap_factor(ue_id, store, candidate_cell, serving_cell, t);
  return out;
}

double QpService::planning_rsrp_dbm(const std::string& cell_id, double x, double y) const {
  for (const auto& c : cells_) {
    if (c.id == cell_id) {
      const double d = std::hypot(x - c.x, y - c.y);
      return netsim::rsrp_no_shadow_dbm(radio_, c.tx_power_dbm, d);
    }
  }
  throw std::invalid_argument("planning_rsrp: unknown cell " + cell_id);
}

double QpService::rsrp_gap_factor(int ue_id, const KpiStore& store,
                                  const std::string& candidate_cell,
                                  const std::string& serving_cell, std::int64_t t) const {
  const auto* rep = store.ue_at(ue_id, t);
  if (rep == nullptr) return 0.0;
  const double cand = planning_rsrp_dbm(candidate_cell, rep->pos_x, rep->pos_y);
  const double serv = planning_rsrp_dbm(serving_cell, rep->pos_x, rep->pos_y);
  const double ratio = std::pow(10.0, (cand - serv) / 10.0);
  return std::clamp(ratio, 0.0, 2.0);
}

std::vector<std::string> QpService::neighbor_set(const KpiStore& store, int ue_id,
                                                 const std::string& serving_cell,
                                                 std::int64_t t) const {
  const auto* rep = store.ue_at(ue_id, t);
  if (rep == nullptr) return {};
  const double serv = planning_rsrp_dbm(serving_cell, rep->pos_x, rep->pos_y);
  std::vector<std::string> out;
  for (const auto& c : cells_) {
    if (c.id == serving_cell) continue;
    const double cand = planning_rsrp_dbm(c.id, rep->pos_x, rep->pos_y);
    if (cand > serv - cfg_.neighbor_rsrp_window_db) out.push_back(c.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<netsim::HandoverRequest> ts_decide(const QoeForecast& serving,
                                                 const std::vector<QoeForecast>& neighbors,
                                                 const A1Policy& policy, std::int64_t t) {
  if (neighbors.empty()) return std::nullopt;
  const QoeForecast* best = nullptr;
  for (const auto& n : neighbors) {
    if (n.horizon != serving.horizon)
      throw std::invalid_argument("ts_decide: mixed forecast horizons");
    if (best == nullptr || n.value > best->value ||
        (n.value == best->value && n.candidate_cell < best->candidate_cell)) {
      best = &n;
    }
  }
  if (best->value > serving.value + policy.handover_margin) {
    return netsim::HandoverRequest{serving.ue_id, best->candidate_cell, t};
  }
  return std::nullopt;
}

}  // namespace steerlab::ric
