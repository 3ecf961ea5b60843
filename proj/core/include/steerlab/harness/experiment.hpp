#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "steerlab/harness/loop.hpp"
#include "steerlab/marrs/pipeline.hpp"

namespace steerlab::harness {

ScenarioConfig make_benign_config(ScenarioConfig base);
ScenarioConfig make_attack_config(ScenarioConfig base, const std::vector<std::string>& cells);

/// Windows for every cell of one run over the full iteration range;
/// vector index equals the window start iteration.
struct RunWindowSet {
  std::string name;
  std::map<std::string, std::vector<marrs::FeatureWindow>> per_cell;

  std::map<std::string, marrs::FeatureWindow> aligned_at(const std::string&,
                                                         std::int64_t start) const;
  std::map<std::string, marrs::FeatureWindow> aligned_at(std::int64_t start) const;
};

/// One scaler's view of all three runs: training windows from the benign
/// run's training span plus full-range windows per run for scoring.
struct WindowUniverse {
  Standardizer scaler;
  std::map<std::string, std::vector<marrs::FeatureWindow>> train_windows;
  std::array<RunWindowSet, 3> runs;  // benign, sas, mas
};

WindowUniverse build_universe(const RunResult& benign, const RunResult& sas, const RunResult& mas,
                              const std::vector<std::string>& cells, std::int64_t train_t_end,
                              std::int64_t total_iterations, std::size_t window_len);

struct EvalItem {
  int run = 0;  // index into WindowUniverse::runs
  std::string cell;
  std::int64_t start = 0;
  int truth = 0;
};

struct ItemSets {
  std::vector<EvalItem> validation;
  std::vector<EvalItem> test;
};

/// Deterministic validation/test composition: benign validation windows come
/// from the benign run's holdout span, positives are chronologically halved
/// between validation and test, and test negatives are drawn from the attack
/// runs' honest cells at the configured benign:malicious ratio.
ItemSets select_items(const ScenarioConfig& cfg, const std::vector<std::string>& cells,
                      const std::vector<std::string>& sas_malicious,
                      const std::vector<std::string>& mas_malicious, std::int64_t train_t_end);

struct SweepRow {
  std::string label;
  std::size_t k = 1;
  std::string rule;
  DetectionMetrics metrics;
};

struct EvaluationReport {
  RunMetrics benign_metrics, sas_metrics, mas_metrics;
  std::map<std::string, CellGain> sas_gain, mas_gain;
  std::vector<MethodScore> benchmark_rows;  // IF, OCSVM, LAE, MARRS
  std::vector<MethodScore> ablation_rows;   // AE1, AE1PLUS, MARRS
  std::vector<MethodScore> time_rows;       // cumulative training segments
  std::vector<SweepRow> sweep_rows;
  std::vector<attack::CraftRecord> sas_craft_records, mas_craft_records;
  int sas_skipped_top = 0;
  double attack_pair_seconds = 0.0;  // benign + SAS wall time
  double marrs_threshold = 0.0;
};

struct EvaluationOptions {
  std::vector<std::size_t> sweep_ks{3, 5, 7};
  bool with_benchmarks = true;
  bool with_ablation = true;
  bool with_time_study = true;
};

/// The end-to-end experiment: benign baseline, detector training, SAS and
/// MAS attack runs, attack-gain tables, benchmark/ablation/over-time
/// comparisons, and the sequence-rule sweep.
EvaluationReport run_evaluation(const ScenarioConfig& base, const EvaluationOptions& opts = {});

/// Calibrates a loss threshold per the configured policy.
double calibrate_threshold(const Vec& val_losses, const std::vector<int>& val_labels,
                           const DetectionConfig& cfg);

}  // namespace steerlab::harness
