#include "steerlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace steerlab {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config: " + where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("config: unknown key '" + key + "' in " + where);
  }
}

double num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("config: ") + key + " must be a number");
  return v.get<double>();
}

std::int64_t integer(const json& obj, const char* key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string("config: ") + key + " must be an integer");
  return v.get<std::int64_t>();
}

std::string str(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(std::string("config: ") + key + " must be a string");
  return v.get<std::string>();
}

bool boolean(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(std::string("config: ") + key + " must be a boolean");
  return v.get<bool>();
}

std::vector<std::string> str_list(const json& obj, const char* key,
                                  std::vector<std::string> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(std::string("config: ") + key + " must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ConfigError(std::string("config: ") + key + " entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

TopologyConfig parse_topology(const json& j) {
  require_keys(j, "topology", {"bounds", "ue_count", "cells"});
  TopologyConfig t;
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    if (!b.is_array() || b.size() != 2) throw ConfigError("config: topology.bounds must be [x, y]");
    t.bounds_x = b[0].get<double>();
    t.bounds_y = b[1].get<double>();
  }
  t.ue_count = static_cast<std::size_t>(integer(j, "ue_count", static_cast<std::int64_t>(t.ue_count)));
  if (j.contains("cells")) {
    t.cells.clear();
    for (const auto& cj : j.at("cells")) {
      require_keys(cj, "topology.cells[]", {"id", "position", "tx_power_dbm", "malicious"});
      CellConfig c;
      c.id = str(cj, "id", "");
      const auto& p = cj.at("position");
      if (!p.is_array() || p.size() != 2) throw ConfigError("config: cell position must be [x, y]");
      c.x = p[0].get<double>();
      c.y = p[1].get<double>();
      c.tx_power_dbm = num(cj, "tx_power_dbm", c.tx_power_dbm);
      c.malicious = boolean(cj, "malicious", false);
      t.cells.push_back(std::move(c));
    }
  }
  return t;
}

RadioConfig parse_radio(const json& j, RadioConfig r) {
  require_keys(j, "radio",
               {"pl0_db", "pl_exponent", "ref_distance_m", "min_distance_m", "shadowing_sigma_db",
                "noise_dbm", "bandwidth_scale_bps", "max_throughput_bps", "uplink_factor",
                "meas_period_prb_khz", "meas_period_jitter"});
  r.pl0_db = num(j, "pl0_db", r.pl0_db);
  r.pl_exponent = num(j, "pl_exponent", r.pl_exponent);
  r.ref_distance_m = num(j, "ref_distance_m", r.ref_distance_m);
  r.min_distance_m = num(j, "min_distance_m", r.min_distance_m);
  r.shadowing_sigma_db = num(j, "shadowing_sigma_db", r.shadowing_sigma_db);
  r.noise_dbm = num(j, "noise_dbm", r.noise_dbm);
  r.bandwidth_scale_bps = num(j, "bandwidth_scale_bps", r.bandwidth_scale_bps);
  r.max_throughput_bps = num(j, "max_throughput_bps", r.max_throughput_bps);
  r.uplink_factor = num(j, "uplink_factor", r.uplink_factor);
  r.meas_period_prb_khz = num(j, "meas_period_prb_khz", r.meas_period_prb_khz);
  r.meas_period_jitter = num(j, "meas_period_jitter", r.meas_period_jitter);
  return r;
}

MobilityConfig parse_mobility(const json& j, MobilityConfig m) {
  require_keys(j, "mobility", {"speed_min", "speed_max", "walk_sigma"});
  m.speed_min = num(j, "speed_min", m.speed_min);
  m.speed_max = num(j, "speed_max", m.speed_max);
  m.walk_sigma = num(j, "walk_sigma", m.walk_sigma);
  return m;
}

RicConfig parse_ric(const json& j, RicConfig r) {
  require_keys(j, "ric",
               {"handover_margin", "min_history", "var_order", "forecast_horizon", "fit_window",
                "neighbor_rsrp_window_db", "ad"});
  r.handover_margin = num(j, "handover_margin", r.handover_margin);
  r.min_history = integer(j, "min_history", r.min_history);
  r.var_order = static_cast<int>(integer(j, "var_order", r.var_order));
  r.forecast_horizon = static_cast<int>(integer(j, "forecast_horizon", r.forecast_horizon));
  r.fit_window = integer(j, "fit_window", r.fit_window);
  r.neighbor_rsrp_window_db = num(j, "neighbor_rsrp_window_db", r.neighbor_rsrp_window_db);
  if (j.contains("ad")) {
    const auto& a = j.at("ad");
    require_keys(a, "ric.ad", {"n_trees", "subsample", "contamination", "train_iterations"});
    r.ad.n_trees = static_cast<std::size_t>(integer(a, "n_trees", static_cast<std::int64_t>(r.ad.n_trees)));
    r.ad.subsample = static_cast<std::size_t>(integer(a, "subsample", static_cast<std::int64_t>(r.ad.subsample)));
    r.ad.contamination = num(a, "contamination", r.ad.contamination);
    r.ad.train_iterations = integer(a, "train_iterations", r.ad.train_iterations);
  }
  return r;
}

AttackConfig parse_attack(const json& j, AttackConfig a) {
  require_keys(j, "attack",
               {"enabled", "start_iteration", "oracle_mode", "substitute", "hsj",
                "category_boundaries", "sas_cells", "mas_cells"});
  a.enabled = boolean(j, "enabled", a.enabled);
  a.start_iteration = integer(j, "start_iteration", a.start_iteration);
  a.oracle_mode = str(j, "oracle_mode", a.oracle_mode);
  if (j.contains("substitute")) {
    const auto& s = j.at("substitute");
    require_keys(s, "attack.substitute",
                 {"hidden", "epochs", "lr", "min_samples", "holdout_fraction", "agreement_min",
                  "max_attempts"});
    a.substitute.hidden = static_cast<std::size_t>(integer(s, "hidden", static_cast<std::int64_t>(a.substitute.hidden)));
    a.substitute.epochs = static_cast<std::size_t>(integer(s, "epochs", static_cast<std::int64_t>(a.substitute.epochs)));
    a.substitute.lr = num(s, "lr", a.substitute.lr);
    a.substitute.min_samples = static_cast<std::size_t>(integer(s, "min_samples", static_cast<std::int64_t>(a.substitute.min_samples)));
    a.substitute.holdout_fraction = num(s, "holdout_fraction", a.substitute.holdout_fraction);
    a.substitute.agreement_min = num(s, "agreement_min", a.substitute.agreement_min);
    a.substitute.max_attempts = static_cast<int>(integer(s, "max_attempts", a.substitute.max_attempts));
  }
  if (j.contains("hsj")) {
    const auto& h = j.at("hsj");
    require_keys(h, "attack.hsj",
                 {"iterations", "direction_samples", "bin_search_tol", "max_l2", "query_budget"});
    a.hsj.iterations = static_cast<int>(integer(h, "iterations", a.hsj.iterations));
    a.hsj.direction_samples = static_cast<int>(integer(h, "direction_samples", a.hsj.direction_samples));
    a.hsj.bin_search_tol = num(h, "bin_search_tol", a.hsj.bin_search_tol);
    a.hsj.max_l2 = num(h, "max_l2", a.hsj.max_l2);
    a.hsj.query_budget = static_cast<int>(integer(h, "query_budget", a.hsj.query_budget));
  }
  if (j.contains("category_boundaries")) {
    const auto& b = j.at("category_boundaries");
    if (b.is_string()) {
      if (b.get<std::string>() != "quartiles")
        throw ConfigError("config: category_boundaries must be \"quartiles\" or [b1,b2,b3]");
      a.category_boundaries.reset();
    } else if (b.is_array() && b.size() == 3) {
      a.category_boundaries = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>()};
    } else {
      throw ConfigError("config: category_boundaries must be \"quartiles\" or [b1,b2,b3]");
    }
  }
  a.sas_cells = str_list(j, "sas_cells", a.sas_cells);
  a.mas_cells = str_list(j, "mas_cells", a.mas_cells);
  return a;
}

DetectionConfig parse_detection(const json& j, DetectionConfig d) {
  require_keys(j, "detection",
               {"window_len", "latent_dim", "hidden_size", "train", "threshold_policy",
                "benign_quantile", "train_fraction", "test_benign_ratio", "segments",
                "sequence_len", "sequence_rule", "lae_latent_dim", "ocsvm_nu"});
  d.window_len = static_cast<std::size_t>(integer(j, "window_len", static_cast<std::int64_t>(d.window_len)));
  d.latent_dim = static_cast<std::size_t>(integer(j, "latent_dim", static_cast<std::int64_t>(d.latent_dim)));
  d.hidden_size = static_cast<std::size_t>(integer(j, "hidden_size", static_cast<std::int64_t>(d.hidden_size)));
  if (j.contains("train")) {
    const auto& t = j.at("train");
    require_keys(t, "detection.train", {"epochs", "batch", "lr"});
    d.train.epochs = static_cast<std::size_t>(integer(t, "epochs", static_cast<std::int64_t>(d.train.epochs)));
    d.train.batch = static_cast<std::size_t>(integer(t, "batch", static_cast<std::int64_t>(d.train.batch)));
    d.train.lr = num(t, "lr", d.train.lr);
  }
  d.threshold_policy = str(j, "threshold_policy", d.threshold_policy);
  d.benign_quantile = num(j, "benign_quantile", d.benign_quantile);
  d.train_fraction = num(j, "train_fraction", d.train_fraction);
  d.test_benign_ratio = num(j, "test_benign_ratio", d.test_benign_ratio);
  d.segments = static_cast<int>(integer(j, "segments", d.segments));
  d.sequence_len = static_cast<std::size_t>(integer(j, "sequence_len", static_cast<std::int64_t>(d.sequence_len)));
  d.sequence_rule = str(j, "sequence_rule", d.sequence_rule);
  d.lae_latent_dim = static_cast<std::size_t>(integer(j, "lae_latent_dim", static_cast<std::int64_t>(d.lae_latent_dim)));
  d.ocsvm_nu = num(j, "ocsvm_nu", d.ocsvm_nu);
  return d;
}

}  // namespace

const CellConfig* ScenarioConfig::find_cell(const std::string& id) const {
  for (const auto& c : topology.cells) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::vector<std::string> ScenarioConfig::cell_ids() const {
  std::vector<std::string> out;
  out.reserve(topology.cells.size());
  for (const auto& c : topology.cells) out.push_back(c.id);
  return out;
}

std::vector<std::string> ScenarioConfig::malicious_cell_ids() const {
  std::vector<std::string> out;
  for (const auto& c : topology.cells) {
    if (c.malicious) out.push_back(c.id);
  }
  return out;
}

void ScenarioConfig::validate() const {
  if (iterations <= 0) throw ConfigError("config: iterations must be positive");
  if (mode != "in_process" && mode != "split")
    throw ConfigError("config: mode must be in_process or split");
  if (topology.cells.size() < 2) throw ConfigError("config: at least 2 cells required");
  if (topology.ue_count < 1) throw ConfigError("config: at least 1 UE required");
  if (topology.bounds_x <= 0.0 || topology.bounds_y <= 0.0)
    throw ConfigError("config: topology bounds must be positive");

  std::set<std::string> seen;
  for (const auto& c : topology.cells) {
    if (c.id.empty()) throw ConfigError("config: cell id must not be empty");
    if (!seen.insert(c.id).second) throw ConfigError("config: duplicate cell id " + c.id);
    if (!std::isfinite(c.tx_power_dbm)) throw ConfigError("config: tx_power must be finite");
    if (c.x < 0.0 || c.x > topology.bounds_x || c.y < 0.0 || c.y > topology.bounds_y)
      throw ConfigError("config: cell " + c.id + " outside topology bounds");
  }

  if (radio.pl_exponent <= 0.0) throw ConfigError("config: pl_exponent must be positive");
  if (radio.ref_distance_m <= 0.0 || radio.min_distance_m <= 0.0)
    throw ConfigError("config: radio distances must be positive");
  if (radio.shadowing_sigma_db < 0.0) throw ConfigError("config: shadowing sigma must be >= 0");
  if (radio.max_throughput_bps <= 0.0 || radio.bandwidth_scale_bps <= 0.0)
    throw ConfigError("config: throughput constants must be positive");
  if (radio.uplink_factor < 0.0 || radio.uplink_factor > 1.0)
    throw ConfigError("config: uplink_factor must be in [0,1]");
  if (radio.meas_period_prb_khz <= 0.0) throw ConfigError("config: meas_period_prb must be positive");

  if (mobility.speed_min < 0.0 || mobility.speed_max < mobility.speed_min)
    throw ConfigError("config: mobility speed range invalid");
  if (mobility.walk_sigma < 0.0) throw ConfigError("config: walk_sigma must be >= 0");

  if (ric.handover_margin < 0.0) throw ConfigError("config: handover_margin must be >= 0");
  if (ric.min_history < 1) throw ConfigError("config: min_history must be >= 1");
  if (ric.var_order < 1) throw ConfigError("config: var_order must be >= 1");
  if (ric.forecast_horizon < 0) throw ConfigError("config: forecast_horizon must be >= 0");
  if (ric.fit_window < ric.min_history) throw ConfigError("config: fit_window < min_history");
  if (ric.ad.n_trees < 1 || ric.ad.subsample < 2) throw ConfigError("config: ad forest shape invalid");
  if (ric.ad.contamination <= 0.0 || ric.ad.contamination >= 1.0)
    throw ConfigError("config: ad contamination must be in (0,1)");
  if (ric.ad.train_iterations < 1) throw ConfigError("config: ad train_iterations must be >= 1");

  if (attack.oracle_mode != "substitute_only" && attack.oracle_mode != "exact_oracle")
    throw ConfigError("config: oracle_mode must be substitute_only or exact_oracle");
  if (attack.oracle_mode == "exact_oracle" && mode == "split")
    throw ConfigError("config: exact_oracle requires in_process mode");
  if (attack.start_iteration < 0) throw ConfigError("config: attack start_iteration must be >= 0");
  if (attack.hsj.iterations < 1 || attack.hsj.direction_samples < 1)
    throw ConfigError("config: hsj shape invalid");
  if (attack.hsj.bin_search_tol <= 0.0 || attack.hsj.max_l2 <= 0.0)
    throw ConfigError("config: hsj tolerances must be positive");
  if (attack.hsj.query_budget < 1) throw ConfigError("config: query_budget must be >= 1");
  if (attack.substitute.holdout_fraction <= 0.0 || attack.substitute.holdout_fraction >= 1.0)
    throw ConfigError("config: holdout_fraction must be in (0,1)");
  if (attack.category_boundaries) {
    const auto& b = *attack.category_boundaries;
    if (!(b[0] < b[1] && b[1] < b[2]))
      throw ConfigError("config: category boundaries must be strictly increasing");
  }
  for (const auto& id : attack.sas_cells) {
    if (!find_cell(id)) throw ConfigError("config: unknown sas cell " + id);
  }
  for (const auto& id : attack.mas_cells) {
    if (!find_cell(id)) throw ConfigError("config: unknown mas cell " + id);
  }
  if (attack.enabled && malicious_cell_ids().empty())
    throw ConfigError("config: attack enabled but no cell is flagged malicious");

  if (detection.window_len < 1) throw ConfigError("config: window_len must be >= 1");
  if (detection.latent_dim < 1 || detection.hidden_size < 1)
    throw ConfigError("config: detection model dims must be >= 1");
  if (detection.threshold_policy != "max_f1" && detection.threshold_policy != "benign_quantile")
    throw ConfigError("config: threshold_policy must be max_f1 or benign_quantile");
  if (detection.benign_quantile <= 0.0 || detection.benign_quantile > 1.0)
    throw ConfigError("config: benign_quantile must be in (0,1]");
  if (detection.train_fraction <= 0.0 || detection.train_fraction >= 1.0)
    throw ConfigError("config: train_fraction must be in (0,1)");
  if (detection.test_benign_ratio <= 0.0)
    throw ConfigError("config: test_benign_ratio must be positive");
  if (detection.segments < 1) throw ConfigError("config: segments must be >= 1");
  if (detection.sequence_len < 1) throw ConfigError("config: sequence_len must be >= 1");
  if (detection.sequence_rule != "majority" && detection.sequence_rule != "all")
    throw ConfigError("config: sequence_rule must be majority or all");
}

ScenarioConfig default_config() {
  ScenarioConfig cfg;
  cfg.topology.cells = {
      {"BS1", 200.0, 200.0, 30.0, false}, {"BS2", 800.0, 200.0, 30.0, false},
      {"BS3", 200.0, 800.0, 30.0, false}, {"BS4", 800.0, 800.0, 30.0, false},
      {"BS5", 350.0, 500.0, 30.0, false}, {"BS6", 650.0, 500.0, 33.0, false},
  };
  return cfg;
}

ScenarioConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  require_keys(j, "<root>",
               {"seed", "iterations", "mode", "topology", "radio", "mobility", "ric", "attack",
                "detection"});

  ScenarioConfig cfg = default_config();
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) throw ConfigError("config: seed must be an integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.iterations = integer(j, "iterations", cfg.iterations);
  cfg.mode = str(j, "mode", cfg.mode);
  if (j.contains("topology")) cfg.topology = parse_topology(j.at("topology"));
  if (j.contains("radio")) cfg.radio = parse_radio(j.at("radio"), cfg.radio);
  if (j.contains("mobility")) cfg.mobility = parse_mobility(j.at("mobility"), cfg.mobility);
  if (j.contains("ric")) cfg.ric = parse_ric(j.at("ric"), cfg.ric);
  if (j.contains("attack")) cfg.attack = parse_attack(j.at("attack"), cfg.attack);
  if (j.contains("detection")) cfg.detection = parse_detection(j.at("detection"), cfg.detection);

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& cfg) {
  json cells = json::array();
  for (const auto& c : cfg.topology.cells) {
    cells.push_back({{"id", c.id},
                     {"position", {c.x, c.y}},
                     {"tx_power_dbm", c.tx_power_dbm},
                     {"malicious", c.malicious}});
  }
  json j = {
      {"seed", cfg.seed},
      {"iterations", cfg.iterations},
      {"mode", cfg.mode},
      {"topology",
       {{"bounds", {cfg.topology.bounds_x, cfg.topology.bounds_y}},
        {"ue_count", cfg.topology.ue_count},
        {"cells", cells}}},
      {"radio",
       {{"pl0_db", cfg.radio.pl0_db},
        {"pl_exponent", cfg.radio.pl_exponent},
        {"ref_distance_m", cfg.radio.ref_distance_m},
        {"min_distance_m", cfg.radio.min_distance_m},
        {"shadowing_sigma_db", cfg.radio.shadowing_sigma_db},
        {"noise_dbm", cfg.radio.noise_dbm},
        {"bandwidth_scale_bps", cfg.radio.bandwidth_scale_bps},
        {"max_throughput_bps", cfg.radio.max_throughput_bps},
        {"uplink_factor", cfg.radio.uplink_factor},
        {"meas_period_prb_khz", cfg.radio.meas_period_prb_khz},
        {"meas_period_jitter", cfg.radio.meas_period_jitter}}},
      {"mobility",
       {{"speed_min", cfg.mobility.speed_min},
        {"speed_max", cfg.mobility.speed_max},
        {"walk_sigma", cfg.mobility.walk_sigma}}},
      {"ric",
       {{"handover_margin", cfg.ric.handover_margin},
        {"min_history", cfg.ric.min_history},
        {"var_order", cfg.ric.var_order},
        {"forecast_horizon", cfg.ric.forecast_horizon},
        {"fit_window", cfg.ric.fit_window},
        {"neighbor_rsrp_window_db", cfg.ric.neighbor_rsrp_window_db},
        {"ad",
         {{"n_trees", cfg.ric.ad.n_trees},
          {"subsample", cfg.ric.ad.subsample},
          {"contamination", cfg.ric.ad.contamination},
          {"train_iterations", cfg.ric.ad.train_iterations}}}}},
      {"attack",
       {{"enabled", cfg.attack.enabled},
        {"start_iteration", cfg.attack.start_iteration},
        {"oracle_mode", cfg.attack.oracle_mode},
        {"substitute",
         {{"hidden", cfg.attack.substitute.hidden},
          {"epochs", cfg.attack.substitute.epochs},
          {"lr", cfg.attack.substitute.lr},
          {"min_samples", cfg.attack.substitute.min_samples},
          {"holdout_fraction", cfg.attack.substitute.holdout_fraction},
          {"agreement_min", cfg.attack.substitute.agreement_min},
          {"max_attempts", cfg.attack.substitute.max_attempts}}},
        {"hsj",
         {{"iterations", cfg.attack.hsj.iterations},
          {"direction_samples", cfg.attack.hsj.direction_samples},
          {"bin_search_tol", cfg.attack.hsj.bin_search_tol},
          {"max_l2", cfg.attack.hsj.max_l2},
          {"query_budget", cfg.attack.hsj.query_budget}}},
        {"sas_cells", cfg.attack.sas_cells},
        {"mas_cells", cfg.attack.mas_cells}}},
      {"detection",
       {{"window_len", cfg.detection.window_len},
        {"latent_dim", cfg.detection.latent_dim},
        {"hidden_size", cfg.detection.hidden_size},
        {"train",
         {{"epochs", cfg.detection.train.epochs},
          {"batch", cfg.detection.train.batch},
          {"lr", cfg.detection.train.lr}}},
        {"threshold_policy", cfg.detection.threshold_policy},
        {"benign_quantile", cfg.detection.benign_quantile},
        {"train_fraction", cfg.detection.train_fraction},
        {"test_benign_ratio", cfg.detection.test_benign_ratio},
        {"segments", cfg.detection.segments},
        {"sequence_len", cfg.detection.sequence_len},
        {"sequence_rule", cfg.detection.sequence_rule},
        {"lae_latent_dim", cfg.detection.lae_latent_dim},
        {"ocsvm_nu", cfg.detection.ocsvm_nu}}},
  };
  if (cfg.attack.category_boundaries) {
    const auto& b = *cfg.attack.category_boundaries;
    j["attack"]["category_boundaries"] = {b[0], b[1], b[2]};
  } else {
    j["attack"]["category_boundaries"] = "quartiles";
  }
  return j.dump(2);
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  const std::string canon = config_to_json(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace steerlab
