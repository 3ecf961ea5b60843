#include "steerlab/harness/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace steerlab::harness {

void RunMetrics::record(const netsim::KpiReportBatch& batch, int handover_count) {
  if (cell_ids.empty()) {
    for (const auto& cr : batch.cell_reports) cell_ids.push_back(cr.cell_id);
    for (const auto& id : cell_ids) ue_counts[id] = {};
  }
  std::map<std::string, int> counts;
  for (const auto& id : cell_ids) counts[id] = 0;
  for (const auto& ur : batch.ue_reports) {
    auto it = counts.find(ur.serving_cell);
    if (it != counts.end()) ++it->second;
  }
  for (const auto& id : cell_ids) ue_counts[id].push_back(counts[id]);
  handovers.push_back(handover_count);
  ++iterations;
}

double RunMetrics::mean_count(const std::string& cell) const {
  const auto& v = ue_counts.at(cell);
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (int x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

int RunMetrics::min_count(const std::string& cell) const {
  const auto& v = ue_counts.at(cell);
  return v.empty() ? 0 : *std::min_element(v.begin(), v.end());
}

int RunMetrics::max_count(const std::string& cell) const {
  const auto& v = ue_counts.at(cell);
  return v.empty() ? 0 : *std::max_element(v.begin(), v.end());
}

std::map<std::string, CellGain> compute_attack_gain(const RunMetrics& benign,
                                                    const RunMetrics& malicious) {
  if (benign.cell_ids != malicious.cell_ids) {
    throw std::invalid_argument("compute_attack_gain: runs cover different topologies");
  }
  std::map<std::string, CellGain> out;
  for (const auto& cell : benign.cell_ids) {
    CellGain g;
    g.benign_mean = benign.mean_count(cell);
    g.benign_min = benign.min_count(cell);
    g.benign_max = benign.max_count(cell);
    g.malicious_mean = malicious.mean_count(cell);
    g.malicious_min = malicious.min_count(cell);
    g.malicious_max = malicious.max_count(cell);
    g.diff_pct = g.benign_mean == 0.0 ? 0.0 : 100.0 * g.malicious_mean / g.benign_mean;
    out[cell] = g;
  }
  return out;
}

double DetectionMetrics::accuracy() const {
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

double DetectionMetrics::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double DetectionMetrics::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double DetectionMetrics::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

DetectionMetrics compute_detection_metrics(const std::vector<int>& verdicts,
                                           const std::vector<int>& ground_truth) {
  if (verdicts.size() != ground_truth.size()) {
    throw std::invalid_argument("compute_detection_metrics: length mismatch");
  }
  DetectionMetrics m;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const bool predicted = verdicts[i] == 1;
    const bool actual = ground_truth[i] == 1;
    if (predicted && actual) ++m.tp;
    else if (predicted && !actual) ++m.fp;
    else if (!predicted && actual) ++m.fn;
    else ++m.tn;
  }
  return m;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("export: cannot open for write: " + path);
  return f;
}

}  // namespace

void export_per_iteration_csv(const RunMetrics& metrics, const std::string& path) {
  auto f = open_out(path);
  f << "iteration";
  for (const auto& id : metrics.cell_ids) f << "," << id;
  f << ",handovers\n";
  for (std::int64_t t = 0; t < metrics.iterations; ++t) {
    f << t;
    for (const auto& id : metrics.cell_ids) f << "," << metrics.ue_counts.at(id)[static_cast<std::size_t>(t)];
    f << "," << metrics.handovers[static_cast<std::size_t>(t)] << "\n";
  }
  if (!f) throw std::runtime_error("export: write failed: " + path);
}

void export_attack_gain_csv(const std::map<std::string, CellGain>& gains,
                            const std::string& path) {
  auto f = open_out(path);
  f << "cell,benign_mean,benign_min,benign_max,malicious_mean,malicious_min,malicious_max,"
       "diff_pct\n";
  for (const auto& [cell, g] : gains) {
    f << cell << "," << format_double(g.benign_mean) << "," << g.benign_min << "," << g.benign_max
      << "," << format_double(g.malicious_mean) << "," << g.malicious_min << "," << g.malicious_max
      << "," << format_double(g.diff_pct) << "\n";
  }
  if (!f) throw std::runtime_error("export: write failed: " + path);
}

void export_detection_csv(const std::vector<MethodScore>& rows, const std::string& path) {
  auto f = open_out(path);
  f << "method,accuracy,precision,recall,f1,threshold,tp,fp,fn,tn\n";
  for (const auto& r : rows) {
    f << r.name << "," << format_double(r.metrics.accuracy()) << ","
      << format_double(r.metrics.precision()) << "," << format_double(r.metrics.recall()) << ","
      << format_double(r.metrics.f1()) << "," << format_double(r.threshold) << "," << r.metrics.tp
      << "," << r.metrics.fp << "," << r.metrics.fn << "," << r.metrics.tn << "\n";
  }
  if (!f) throw std::runtime_error("export: write failed: " + path);
}

void export_manifest(const ScenarioConfig& cfg, const std::string& scenario_name,
                     const std::string& path) {
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  nlohmann::json j = {{"app_version", "1.0.0"},
                      {"schema_version", 1},
                      {"scenario", scenario_name},
                      {"seed", cfg.seed},
                      {"mode", cfg.mode},
                      {"iterations", cfg.iterations},
                      {"config_hash", std::string(hash_hex)}};
  auto f = open_out(path);
  f << j.dump(2) << "\n";
  if (!f) throw std::runtime_error("export: write failed: " + path);
}

}  // namespace steerlab::harness
