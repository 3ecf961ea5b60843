#pragma once

#include <map>
#include <string>
#include <vector>

#include "steerlab/config.hpp"
#include "steerlab/math/rng.hpp"
#include "steerlab/netsim/types.hpp"

namespace steerlab::netsim {

struct CellNode {
  std::string id;
  double x = 0.0, y = 0.0;
  double tx_power_dbm = 30.0;
  bool malicious = false;
};

struct UeNode {
  int id = 0;
  double x = 0.0, y = 0.0;
  double vx = 0.0, vy = 0.0;
  std::string serving_cell;
};

/// Bipartite network state: cells, UEs, and the serving edge per UE.
struct NetworkState {
  std::vector<CellNode> cells;
  std::vector<UeNode> ues;  // sorted by id
  std::int64_t iteration = 0;

  const CellNode* find_cell(const std::string& id) const;
  UeNode* find_ue(int id);
  const UeNode* find_ue(int id) const;
  std::map<std::string, int> serving_counts() const;
};

/// Log-distance path loss in dB at distance d (meters).
double path_loss_db(const RadioConfig& radio, double d);

/// RSRP without shadowing, the deterministic part of the link budget.
double rsrp_no_shadow_dbm(const RadioConfig& radio, double tx_power_dbm, double distance_m);

struct RadioSample {
  double rsrp_dbm = 0.0;
  double rsrq_db = 0.0;
  double snir_db = 0.0;
};

/// Radio quantities for one UE-cell link given per-cell shadowing terms
/// (indexed like state.cells). SNIR counts every other cell as interference;
/// RSRQ relates serving power to the total received power.
RadioSample compute_radio(const NetworkState& state, const RadioConfig& radio, const UeNode& ue,
                          std::size_t cell_index, const std::vector<double>& shadow_db);

double shannon_throughput_bps(const RadioConfig& radio, double snir_db);

/// Discrete-step cell/UE simulator. One instance per scenario; stepping is
/// single-threaded and fully determined by (config, seed).
class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg);

  /// Moves every UE by its velocity plus seeded random-walk noise, reflecting
  /// at the topology bounds. Serving edges are not touched.
  void step_mobility();

  /// Emits one UE report per UE and one cell report per cell for the current
  /// iteration. New/left counts are relative to the previous emission.
  KpiReportBatch emit_reports();

  /// Applies a handover; returns false (state untouched) for unknown ids.
  bool apply_handover(const HandoverRequest& req);

  void advance() { ++state_.iteration; }

  const NetworkState& state() const { return state_; }
  const ScenarioConfig& config() const { return cfg_; }

 private:
  ScenarioConfig cfg_;
  NetworkState state_;
  Rng mobility_rng_;
  Rng radio_rng_;
  std::map<int, std::string> prev_serving_;
};

}  // namespace steerlab::netsim
