#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "steerlab/config.hpp"
#include "steerlab/math/stats.hpp"
#include "steerlab/netsim/types.hpp"
#include "steerlab/nn/optimizer.hpp"
#include "steerlab/ric/var.hpp"

namespace steerlab::attack {

enum class QoeCategory : int { Poor = 0, Average = 1, Good = 2, Excellent = 3 };

/// Three strictly increasing boundaries partitioning the QoE axis into the
/// four quality bins, half-open on the right of each boundary.
struct CategoryBounds {
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;

  static CategoryBounds from_quartiles(const Vec& qoe_samples);
  bool valid() const { return b1 < b2 && b2 < b3; }
};

QoeCategory categorize(double qoe, const CategoryBounds& bounds);

/// The five reportable cell KPI fields, the attacker's entire lever.
Vec cell_features(const netsim::CellKpiReport& report);

struct SubstituteDataset {
  std::vector<Vec> features;  // raw cell KPI vectors
  Vec labels;                 // observed QoE values

  std::size_t size() const { return features.size(); }
};

struct AgreementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoInitSample : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Regression substitute for the QP plus the categorizer it is attacked
/// through. Label scaling is internal; inputs are standardized by `scaler`.
struct SubstituteModel {
  Standardizer scaler;
  nn::Mlp net;
  CategoryBounds bounds;
  double label_mean = 0.0;
  double label_std = 1.0;
  double holdout_agreement = 0.0;

  double predict_std(const Vec& x_std) const {
    return net.predict1(x_std) * label_std + label_mean;
  }
  double predict_raw(const Vec& x_raw) const { return predict_std(scaler.apply(x_raw)); }
  int category_std(const Vec& x_std) const {
    return static_cast<int>(categorize(predict_std(x_std), bounds));
  }
  int category_raw(const Vec& x_raw) const {
    return static_cast<int>(categorize(predict_raw(x_raw), bounds));
  }
};

/// Trains the substitute on an 80/20 chronological split until the held-out
/// categorical agreement reaches the configured floor, retrying with fresh
/// seeds; throws AgreementError when the floor is unreachable.
SubstituteModel train_substitute(const SubstituteDataset& dataset, const SubstituteConfig& cfg,
                                 const std::optional<std::array<double, 3>>& fixed_bounds,
                                 std::uint64_t seed);

struct AttackBudget {
  double max_l2 = 3.0;      // standardized feature units
  int query_budget = 25000;
  Vec box_lo, box_hi;       // standardized clamp box
};

struct CraftOutcome {
  bool success = false;
  Vec r_std, adv_std, delta_std;
  double delta_norm = 0.0;
  int original_cat = 0;
  int target_cat = 0;
  int achieved_cat = 0;
  int query_count = 0;
  std::string failure_reason;
};

using CategorizerFn = std::function<int(const Vec&)>;

/// Decision-based boundary attack against a hard-label categorizer:
/// initialization at a known in-target sample, binary search to the decision
/// boundary, Monte Carlo direction estimation from label indicators, and a
/// geometric step-size search, keeping the closest boundary point found.
CraftOutcome craft_adversarial(const CategorizerFn& categorizer, const Vec& r_std, int target_cat,
                               const std::vector<Vec>& init_pool, const AttackBudget& budget,
                               const HsjConfig& hsj, std::uint64_t seed);

struct AdversarialReport {
  netsim::CellKpiReport original;
  Vec perturbed_raw;  // continuous values; count fields rounded at injection
  Vec delta_std;
  double delta_norm = 0.0;
  int original_cat = 0;
  int achieved_cat = 0;
  int query_count = 0;
};

struct InjectIncident {
  std::int64_t iteration = 0;
  std::string cell_id;
  std::string reason;
};

/// Replaces malicious cells' reports with their crafted counterparts. Count
/// fields are rounded and re-checked against physical bounds; a report that
/// fails the check is dropped and the original is sent instead.
netsim::KpiReportBatch inject(const netsim::KpiReportBatch& batch,
                              const std::map<std::string, AdversarialReport>& crafted,
                              int total_ues, std::vector<InjectIncident>* incidents);

struct CraftRecord {
  std::int64_t iteration = 0;
  std::string cell_id;
  bool success = false;
  double delta_norm = 0.0;
  int query_count = 0;
  int original_cat = 0;
  int achieved_cat = 0;
  std::string failure_reason;
};

/// Per-cell attacker state machine: collects (report, QoE) pairs while the
/// loop runs clean, trains the substitute at the attack start, then crafts a
/// perturbed report every iteration.
class ApateAttacker {
 public:
  using OracleFn = std::function<std::optional<double>(const Vec& features)>;

  ApateAttacker(const AttackConfig& attack_cfg, const RicConfig& ric_cfg, std::string cell_id,
                int total_ues, double max_throughput_bps, double meas_period_khz,
                std::uint64_t seed);

  /// Exact-oracle mode: labels come from this callback instead of the local
  /// QP replica.
  void set_oracle(OracleFn oracle) { oracle_ = std::move(oracle); }

  /// Feeds the attacker its own ground-truth telemetry for this iteration.
  void observe(const netsim::CellKpiReport& own_true,
               const std::vector<netsim::UeKpiReport>& own_ues, std::int64_t t);

  /// Trains the substitute once t reaches the configured attack start.
  void train_if_due(std::int64_t t);

  bool ready() const { return substitute_.has_value(); }

  /// Crafts the adversarial counterpart of the current true report; returns
  /// nothing when crafting is not possible (not yet attacking, already in the
  /// top category, or crafting failed).
  std::optional<AdversarialReport> craft(const netsim::CellKpiReport& own_true, std::int64_t t);

  const SubstituteDataset& dataset() const { return dataset_; }
  const SubstituteModel& substitute() const { return *substitute_; }
  const std::vector<CraftRecord>& records() const { return records_; }
  int skipped_top_category() const { return skipped_top_category_; }

 private:
  std::optional<double> local_label() const;

  AttackConfig cfg_;
  RicConfig ric_cfg_;
  std::string cell_id_;
  int total_ues_;
  double max_throughput_bps_;
  double meas_period_khz_;
  std::uint64_t seed_;
  OracleFn oracle_;
  std::vector<Vec> own_series_;  // (mean served-UE throughput, own aggregate throughput)
  SubstituteDataset dataset_;
  std::optional<SubstituteModel> substitute_;
  std::vector<CraftRecord> records_;
  int skipped_top_category_ = 0;
};

}  // namespace steerlab::attack
