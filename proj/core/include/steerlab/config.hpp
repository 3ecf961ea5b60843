#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace steerlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CellConfig {
  std::string id;
  double x = 0.0, y = 0.0;
  double tx_power_dbm = 30.0;
  bool malicious = false;
};

struct TopologyConfig {
  double bounds_x = 1000.0, bounds_y = 1000.0;
  std::size_t ue_count = 50;
  std::vector<CellConfig> cells;
};

struct RadioConfig {
  double pl0_db = 40.0;          // path loss at the reference distance
  double pl_exponent = 3.5;
  double ref_distance_m = 1.0;
  double min_distance_m = 1.0;
  double shadowing_sigma_db = 4.0;
  double noise_dbm = -100.0;
  double bandwidth_scale_bps = 2.0e6;
  double max_throughput_bps = 5.0e7;
  double uplink_factor = 0.5;
  double meas_period_prb_khz = 500.0;
  double meas_period_jitter = 5.0;
};

struct MobilityConfig {
  double speed_min = 1.0;   // meters per iteration
  double speed_max = 5.0;
  double walk_sigma = 5.0;  // random-walk noise
};

struct AdConfig {
  std::size_t n_trees = 100;
  std::size_t subsample = 256;
  double contamination = 0.1;
  std::int64_t train_iterations = 50;
};

struct RicConfig {
  double handover_margin = 0.0;     // A1 policy, QoE units
  std::int64_t min_history = 20;    // iterations before the QP may forecast
  int var_order = 2;
  int forecast_horizon = 1;
  std::int64_t fit_window = 50;     // most recent iterations fed to the VAR fit
  double neighbor_rsrp_window_db = 20.0;
  AdConfig ad;
};

struct SubstituteConfig {
  std::size_t hidden = 32;
  std::size_t epochs = 300;
  double lr = 1e-3;
  std::size_t min_samples = 50;
  double holdout_fraction = 0.2;
  double agreement_min = 0.8;
  int max_attempts = 5;
};

struct HsjConfig {
  int iterations = 20;
  int direction_samples = 100;
  double bin_search_tol = 1e-3;
  double max_l2 = 3.0;
  int query_budget = 25000;
};

struct AttackConfig {
  bool enabled = false;
  std::int64_t start_iteration = 150;
  std::string oracle_mode = "substitute_only";  // or "exact_oracle"
  SubstituteConfig substitute;
  HsjConfig hsj;
  std::optional<std::array<double, 3>> category_boundaries;  // unset: benign quartiles
  std::vector<std::string> sas_cells{"BS5"};
  std::vector<std::string> mas_cells{"BS1", "BS5"};
};

struct DetectTrainConfig {
  std::size_t epochs = 200;
  std::size_t batch = 32;
  double lr = 1e-3;
};

struct DetectionConfig {
  std::size_t window_len = 10;
  std::size_t latent_dim = 8;
  std::size_t hidden_size = 16;
  DetectTrainConfig train;
  std::string threshold_policy = "max_f1";  // or "benign_quantile"
  double benign_quantile = 0.99;
  double train_fraction = 0.8;
  double test_benign_ratio = 4.0;
  int segments = 4;
  std::size_t sequence_len = 5;
  std::string sequence_rule = "majority";  // or "all"
  std::size_t lae_latent_dim = 4;
  double ocsvm_nu = 0.1;
};

struct ScenarioConfig {
  std::uint64_t seed = 7;
  std::int64_t iterations = 500;
  std::string mode = "in_process";  // or "split"
  TopologyConfig topology;
  RadioConfig radio;
  MobilityConfig mobility;
  RicConfig ric;
  AttackConfig attack;
  DetectionConfig detection;

  const CellConfig* find_cell(const std::string& id) const;
  std::vector<std::string> cell_ids() const;
  std::vector<std::string> malicious_cell_ids() const;

  /// Full structural validation; throws ConfigError on any violation.
  void validate() const;
};

ScenarioConfig default_config();

/// Parses and validates a config from JSON text. Unknown keys are rejected.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);
std::string config_to_json(const ScenarioConfig& cfg);

/// FNV-1a hash of the canonical JSON form, used in run manifests.
std::uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace steerlab
