#include "steerlab/marrs/features.hpp"

#include <stdexcept>

namespace steerlab::marrs {

std::string feature_schema() {
  std::string s;
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
    if (i) s += ",";
    s += kFeatureNames[i];
  }
  return s;
}

FeatureRows raw_feature_rows(const ric::KpiStore& store, const std::string& cell_id,
                             std::int64_t t0, std::int64_t t1) {
  const auto cell_reports = store.cell_window(cell_id, t0, t1);
  FeatureRows out;
  out.start = t0;
  out.values = Matrix(cell_reports.size(), kFeatureCount);
  out.zero_ue.assign(cell_reports.size(), false);

  const auto ue_ids = store.ue_ids();
  for (std::size_t r = 0; r < cell_reports.size(); ++r) {
    const auto& cr = cell_reports[r];
    out.values(r, 0) = cr.throughput_bps;
    out.values(r, 1) = cr.meas_period_prb_khz;
    out.values(r, 2) = cr.num_ues;
    out.values(r, 3) = cr.new_ues;
    out.values(r, 4) = cr.left_ues;

    Vec thp, snir, rsrp;
    for (int ue : ue_ids) {
      const auto* ur = store.ue_at(ue, cr.timestamp);
      if (ur == nullptr || ur->serving_cell != cell_id) continue;
      thp.push_back(ur->pdcp_thp_dl);
      snir.push_back(ur->snir_db);
      rsrp.push_back(ur->rsrp_dbm);
    }
    if (thp.empty()) {
      out.zero_ue[r] = true;
      // mean=0, std=0 for cells serving no UE, flagged above
    } else {
      out.values(r, 5) = mean(thp);
      out.values(r, 6) = stddev_pop(thp);
      out.values(r, 7) = mean(snir);
      out.values(r, 8) = stddev_pop(snir);
      out.values(r, 9) = mean(rsrp);
      out.values(r, 10) = stddev_pop(rsrp);
    }
  }
  return out;
}

Standardizer fit_standardizer(const ric::KpiStore& store, const std::vector<std::string>& cells,
                              std::int64_t t0, std::int64_t t1) {
  std::vector<Vec> rows;
  for (const auto& cell : cells) {
    const auto fr = raw_feature_rows(store, cell, t0, t1);
    for (std::size_t r = 0; r < fr.values.rows(); ++r) rows.push_back(fr.values.row_vec(r));
  }
  Standardizer s;
  s.fit(rows);
  return s;
}

std::vector<Vec> FeatureWindow::rows() const {
  std::vector<Vec> out;
  out.reserve(values.rows());
  for (std::size_t r = 0; r < values.rows(); ++r) out.push_back(values.row_vec(r));
  return out;
}

Vec FeatureWindow::flattened() const { return values.raw(); }

std::vector<FeatureWindow> extract_features(const ric::KpiStore& store, const std::string& cell_id,
                                            std::int64_t t0, std::int64_t t1,
                                            const Standardizer& scaler, std::size_t window_len) {
  if (!scaler.fitted()) {
    throw std::logic_error("extract_features: standardizer not fitted with training statistics");
  }
  if (window_len < 1) throw std::invalid_argument("extract_features: window_len must be >= 1");

  const auto raw = raw_feature_rows(store, cell_id, t0, t1);
  const std::size_t t_count = raw.values.rows();
  std::vector<FeatureWindow> windows;
  if (t_count < window_len) return windows;

  Matrix scaled(t_count, kFeatureCount);
  for (std::size_t r = 0; r < t_count; ++r) scaled.set_row(r, scaler.apply(raw.values.row(r)));

  windows.reserve(t_count - window_len + 1);
  for (std::size_t s = 0; s + window_len <= t_count; ++s) {
    FeatureWindow w;
    w.cell_id = cell_id;
    w.start = t0 + static_cast<std::int64_t>(s);
    w.values = Matrix(window_len, kFeatureCount);
    w.has_zero_ue_rows = false;
    for (std::size_t r = 0; r < window_len; ++r) {
      for (std::size_t c = 0; c < kFeatureCount; ++c) w.values(r, c) = scaled(s + r, c);
      if (raw.zero_ue[s + r]) w.has_zero_ue_rows = true;
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace steerlab::marrs
