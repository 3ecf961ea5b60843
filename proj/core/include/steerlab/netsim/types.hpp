#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace steerlab::netsim {

struct UeKpiReport {
  int ue_id = 0;
  std::string serving_cell;
  std::int64_t timestamp = 0;
  double pdcp_thp_dl = 0.0;
  double pdcp_thp_ul = 0.0;
  double prb_ratio_dl = 0.0;
  double prb_ratio_ul = 0.0;
  double rsrp_dbm = 0.0;
  double rsrq_db = 0.0;
  double snir_db = 0.0;
  // position is carried for logging and plots only, never as a model feature
  double pos_x = 0.0;
  double pos_y = 0.0;
};

struct CellKpiReport {
  std::string cell_id;
  std::int64_t timestamp = 0;
  double throughput_bps = 0.0;
  double meas_period_prb_khz = 0.0;
  int num_ues = 0;
  int new_ues = 0;
  int left_ues = 0;
};

struct KpiReportBatch {
  std::int64_t iteration = 0;
  std::vector<UeKpiReport> ue_reports;
  std::vector<CellKpiReport> cell_reports;
};

struct HandoverRequest {
  int ue_id = 0;
  std::string target_cell;
  std::int64_t issued_at = 0;
};

}  // namespace steerlab::netsim
