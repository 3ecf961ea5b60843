#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "steerlab/attack/apate.hpp"
#include "steerlab/config.hpp"
#include "steerlab/harness/metrics.hpp"
#include "steerlab/netsim/netsim.hpp"
#include "steerlab/ric/kpi_store.hpp"
#include "steerlab/ric/xapps.hpp"

namespace steerlab::harness {

struct RunResult {
  RunMetrics metrics;
  ric::KpiStore store;  // telemetry as the RIC saw it (lies included)
  std::vector<attack::CraftRecord> craft_records;
  std::vector<attack::InjectIncident> incidents;
  int skipped_top_category = 0;
  bool aborted = false;
  std::string diagnostic;
};

/// Simulator-side engine: topology stepping plus the malicious cells'
/// attacker state machines (the lie happens on the reporting path, never in
/// the ground truth).
class SimEngine {
 public:
  explicit SimEngine(const ScenarioConfig& cfg);

  /// Mobility step, report emission, and adversarial injection for iteration t.
  netsim::KpiReportBatch tick(std::int64_t t);

  /// Applies the iteration's handovers and advances; returns how many were
  /// accepted.
  int apply_handovers(const std::vector<netsim::HandoverRequest>& reqs);

  void set_exact_oracle(const std::string& cell,
                        attack::ApateAttacker::OracleFn oracle);

  const netsim::Simulator& simulator() const { return sim_; }
  std::vector<attack::CraftRecord> craft_records() const;
  const std::vector<attack::InjectIncident>& incidents() const { return incidents_; }
  int skipped_top_category() const;

 private:
  ScenarioConfig cfg_;
  netsim::Simulator sim_;
  std::map<std::string, attack::ApateAttacker> attackers_;
  std::vector<attack::InjectIncident> incidents_;
};

/// RIC-side engine: KPI ingestion, anomaly detection, QoE forecasting, and
/// traffic-steering decisions. Pure function of (store, t) once the AD model
/// is frozen.
class RicEngine {
 public:
  explicit RicEngine(const ScenarioConfig& cfg);

  /// Ingests the batch and runs the AD -> QP -> TS pass; returns the
  /// handover requests in deterministic (ascending UE id) order.
  std::vector<netsim::HandoverRequest> on_batch(const netsim::KpiReportBatch& batch);

  /// Exact-oracle hook: the QP's cell-side forecast given a hypothetical
  /// report from `cell`, fitted on everything stored so far.
  std::optional<double> qp_exact_oracle(const std::string& cell, const Vec& features) const;

  const ric::KpiStore& store() const { return store_; }
  ric::KpiStore take_store() { return std::move(store_); }

 private:
  ScenarioConfig cfg_;
  ric::KpiStore store_;
  ric::QpService qp_;
  ric::A1Policy policy_;
  std::optional<anomaly::IsolationForestModel> ad_model_;
};

/// One scenario in a single process. Module failures abort the run; partial
/// metrics and the diagnostic are returned rather than thrown.
RunResult run_closed_loop(const ScenarioConfig& cfg);

/// Same iteration semantics over the wire protocol: the simulator side runs
/// in a forked child process, the RIC side in the caller, lockstep framed
/// messages over a stream socketpair.
RunResult run_split(const ScenarioConfig& cfg);

/// Dispatches on cfg.mode.
RunResult run_scenario(const ScenarioConfig& cfg);

}  // namespace steerlab::harness
