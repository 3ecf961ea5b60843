#include "steerlab/netsim/netsim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace steerlab::netsim {

namespace {

constexpr std::uint64_t kMobilityTag = 0x6d6f6276ULL;
constexpr std::uint64_t kRadioTag = 0x72616469ULL;
constexpr std::uint64_t kInitTag = 0x696e6974ULL;

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_db(double mw) { return 10.0 * std::log10(mw); }

double clamp3(double z) { return std::clamp(z, -3.0, 3.0); }

void reflect(double& p, double& v, double lo, double hi) {
  while (p < lo || p > hi) {
    if (p < lo) {
      p = 2.0 * lo - p;
      v = -v;
    } else {
      p = 2.0 * hi - p;
      v = -v;
    }
  }
}

}  // namespace

const CellNode* NetworkState::find_cell(const std::string& id) const {
  for (const auto& c : cells) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

UeNode* NetworkState::find_ue(int id) {
  for (auto& u : ues) {
    if (u.id == id) return &u;
  }
  return nullptr;
}

const UeNode* NetworkState::find_ue(int id) const {
  for (const auto& u : ues) {
    if (u.id == id) return &u;
  }
  return nullptr;
}

std::map<std::string, int> NetworkState::serving_counts() const {
  std::map<std::string, int> counts;
  for (const auto& c : cells) counts[c.id] = 0;
  for (const auto& u : ues) counts[u.serving_cell] += 1;
  return counts;
}

double path_loss_db(const RadioConfig& radio, double d) {
  const double dist = std::max(d, radio.min_distance_m);
  return radio.pl0_db + 10.0 * radio.pl_exponent * std::log10(dist / radio.ref_distance_m);
}

double rsrp_no_shadow_dbm(const RadioConfig& radio, double tx_power_dbm, double distance_m) {
  return tx_power_dbm - path_loss_db(radio, distance_m);
}

RadioSample compute_radio(const NetworkState& state, const RadioConfig& radio, const UeNode& ue,
                          std::size_t cell_index, const std::vector<double>& shadow_db) {
  assert(shadow_db.size() == state.cells.size());
  const double noise_mw = dbm_to_mw(radio.noise_dbm);

  std::vector<double> rx_mw(state.cells.size());
  for (std::size_t k = 0; k < state.cells.size(); ++k) {
    const auto& cell = state.cells[k];
    const double d = std::hypot(ue.x - cell.x, ue.y - cell.y);
    double rsrp = rsrp_no_shadow_dbm(radio, cell.tx_power_dbm, d) - shadow_db[k];
    rsrp = std::min(rsrp, cell.tx_power_dbm);
    rx_mw[k] = dbm_to_mw(rsrp);
  }

  double interference = 0.0, total = noise_mw;
  for (std::size_t k = 0; k < rx_mw.size(); ++k) {
    total += rx_mw[k];
    if (k != cell_index) interference += rx_mw[k];
  }

  RadioSample s;
  s.rsrp_dbm = mw_to_db(rx_mw[cell_index]);
  s.snir_db = mw_to_db(rx_mw[cell_index] / (noise_mw + interference));
  s.rsrq_db = mw_to_db(rx_mw[cell_index] / total);
  return s;
}

double shannon_throughput_bps(const RadioConfig& radio, double snir_db) {
  const double snir_lin = std::pow(10.0, snir_db / 10.0);
  const double thp = radio.bandwidth_scale_bps * std::log2(1.0 + snir_lin);
  return std::clamp(thp, 0.0, radio.max_throughput_bps);
}

Simulator::Simulator(const ScenarioConfig& cfg)
    : cfg_(cfg),
      mobility_rng_(derive_seed(cfg.seed, kMobilityTag)),
      radio_rng_(derive_seed(cfg.seed, kRadioTag)) {
  cfg_.validate();

  for (const auto& c : cfg_.topology.cells) {
    state_.cells.push_back(CellNode{c.id, c.x, c.y, c.tx_power_dbm, c.malicious});
  }

  Rng init_rng(derive_seed(cfg.seed, kInitTag));
  for (std::size_t i = 0; i < cfg_.topology.ue_count; ++i) {
    UeNode ue;
    ue.id = static_cast<int>(i);
    ue.x = init_rng.uniform(0.0, cfg_.topology.bounds_x);
    ue.y = init_rng.uniform(0.0, cfg_.topology.bounds_y);
    const double speed = init_rng.uniform(cfg_.mobility.speed_min, cfg_.mobility.speed_max);
    const double angle = init_rng.uniform(0.0, 2.0 * M_PI);
    ue.vx = speed * std::cos(angle);
    ue.vy = speed * std::sin(angle);

    // initial assignment: strongest deterministic RSRP, ties to the lowest id
    double best = -1e300;
    for (const auto& cell : state_.cells) {
      const double d = std::hypot(ue.x - cell.x, ue.y - cell.y);
      const double rsrp = rsrp_no_shadow_dbm(cfg_.radio, cell.tx_power_dbm, d);
      if (rsrp > best || (rsrp == best && ue.serving_cell.empty())) {
        best = rsrp;
        ue.serving_cell = cell.id;
      }
    }
    state_.ues.push_back(std::move(ue));
  }
  state_.iteration = 0;

  for (const auto& ue : state_.ues) prev_serving_[ue.id] = ue.serving_cell;
}

void Simulator::step_mobility() {
  const double sigma = cfg_.mobility.walk_sigma;
  for (auto& ue : state_.ues) {
    double nx = 0.0, ny = 0.0;
    if (sigma > 0.0) {
      nx = sigma * mobility_rng_.normal();
      ny = sigma * mobility_rng_.normal();
    }
    ue.x += ue.vx + nx;
    ue.y += ue.vy + ny;
    reflect(ue.x, ue.vx, 0.0, cfg_.topology.bounds_x);
    reflect(ue.y, ue.vy, 0.0, cfg_.topology.bounds_y);
  }
}

KpiReportBatch Simulator::emit_reports() {
  KpiReportBatch batch;
  batch.iteration = state_.iteration;

  // one shadowing draw per UE-cell pair per iteration, UE-major fixed order
  const bool shadowing = cfg_.radio.shadowing_sigma_db > 0.0;
  std::map<std::string, double> cell_throughput;
  std::map<std::string, int> cell_count;
  for (const auto& c : state_.cells) {
    cell_throughput[c.id] = 0.0;
    cell_count[c.id] = 0;
  }

  std::vector<double> shadow(state_.cells.size(), 0.0);
  for (const auto& ue : state_.ues) {
    if (shadowing) {
      for (auto& s : shadow) s = cfg_.radio.shadowing_sigma_db * clamp3(radio_rng_.normal());
    }
    std::size_t serving_index = 0;
    for (std::size_t k = 0; k < state_.cells.size(); ++k) {
      if (state_.cells[k].id == ue.serving_cell) serving_index = k;
    }
    const RadioSample rs = compute_radio(state_, cfg_.radio, ue, serving_index, shadow);
    const double thp_dl = shannon_throughput_bps(cfg_.radio, rs.snir_db);
    const double thp_ul = cfg_.radio.uplink_factor * thp_dl;

    UeKpiReport rep;
    rep.ue_id = ue.id;
    rep.serving_cell = ue.serving_cell;
    rep.timestamp = state_.iteration;
    rep.pdcp_thp_dl = thp_dl;
    rep.pdcp_thp_ul = thp_ul;
    rep.prb_ratio_dl = thp_dl / cfg_.radio.max_throughput_bps;
    rep.prb_ratio_ul = thp_ul / cfg_.radio.max_throughput_bps;
    rep.rsrp_dbm = rs.rsrp_dbm;
    rep.rsrq_db = rs.rsrq_db;
    rep.snir_db = rs.snir_db;
    rep.pos_x = ue.x;
    rep.pos_y = ue.y;
    batch.ue_reports.push_back(std::move(rep));

    cell_throughput[ue.serving_cell] += thp_dl;
    cell_count[ue.serving_cell] += 1;
  }

  for (const auto& cell : state_.cells) {
    CellKpiReport rep;
    rep.cell_id = cell.id;
    rep.timestamp = state_.iteration;
    rep.throughput_bps = cell_throughput[cell.id];
    rep.meas_period_prb_khz =
        cfg_.radio.meas_period_prb_khz + cfg_.radio.meas_period_jitter * clamp3(radio_rng_.normal());
    rep.num_ues = cell_count[cell.id];
    int new_ues = 0, left_ues = 0;
    for (const auto& ue : state_.ues) {
      const bool now = ue.serving_cell == cell.id;
      const bool before = prev_serving_.at(ue.id) == cell.id;
      if (now && !before) ++new_ues;
      if (!now && before) ++left_ues;
    }
    rep.new_ues = new_ues;
    rep.left_ues = left_ues;
    batch.cell_reports.push_back(std::move(rep));
  }

  for (const auto& ue : state_.ues) prev_serving_[ue.id] = ue.serving_cell;
  return batch;
}

bool Simulator::apply_handover(const HandoverRequest& req) {
  UeNode* ue = state_.find_ue(req.ue_id);
  if (ue == nullptr) return false;
  if (state_.find_cell(req.target_cell) == nullptr) return false;
  ue->serving_cell = req.target_cell;
  return true;
}

}  // namespace steerlab::netsim
