#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "steerlab/config.hpp"
#include "steerlab/netsim/types.hpp"

namespace steerlab::harness {

/// Per-run bookkeeping: true per-cell UE counts per iteration (derived from
/// the UE reports' serving edges) plus handover volume.
struct RunMetrics {
  std::vector<std::string> cell_ids;  // column order
  std::map<std::string, std::vector<int>> ue_counts;
  std::vector<int> handovers;
  std::int64_t iterations = 0;

  void record(const netsim::KpiReportBatch& batch, int handover_count);

  double mean_count(const std::string& cell) const;
  int min_count(const std::string& cell) const;
  int max_count(const std::string& cell) const;
};

struct CellGain {
  double benign_mean = 0.0, malicious_mean = 0.0;
  int benign_min = 0, benign_max = 0, malicious_min = 0, malicious_max = 0;
  double diff_pct = 0.0;  // 100 * malicious_mean / benign_mean
};

/// Per-cell comparison of a paired benign/malicious run. Throws on
/// mismatched topologies.
std::map<std::string, CellGain> compute_attack_gain(const RunMetrics& benign,
                                                    const RunMetrics& malicious);

struct DetectionMetrics {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  double accuracy() const;
  double precision() const;
  double recall() const;
  double f1() const;
};

/// Confusion metrics over parallel verdict/truth vectors (1 = untrusted).
/// Throws on length mismatch.
DetectionMetrics compute_detection_metrics(const std::vector<int>& verdicts,
                                           const std::vector<int>& ground_truth);

// CSV and manifest export. All writers are deterministic: same inputs, same
// bytes.
void export_per_iteration_csv(const RunMetrics& metrics, const std::string& path);
void export_attack_gain_csv(const std::map<std::string, CellGain>& gains, const std::string& path);

struct MethodScore {
  std::string name;
  DetectionMetrics metrics;
  double threshold = 0.0;
};
void export_detection_csv(const std::vector<MethodScore>& rows, const std::string& path);

void export_manifest(const ScenarioConfig& cfg, const std::string& scenario_name,
                     const std::string& path);

std::string format_double(double v);

}  // namespace steerlab::harness
