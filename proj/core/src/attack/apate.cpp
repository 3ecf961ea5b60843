#include "steerlab/attack/apate.hpp"

#include <algorithm>
#include <cmath>

namespace steerlab::attack {

CategoryBounds CategoryBounds::from_quartiles(const Vec& qoe_samples) {
  CategoryBounds b;
  b.b1 = quantile(qoe_samples, 0.25);
  b.b2 = quantile(qoe_samples, 0.50);
  b.b3 = quantile(qoe_samples, 0.75);
  if (!b.valid()) {
    // degenerate sample spread; widen deterministically so the bins exist
    const double base = b.b1;
    const double step = std::max(std::fabs(base) * 1e-6, 1e-9);
    b.b1 = base;
    b.b2 = base + step;
    b.b3 = base + 2.0 * step;
  }
  return b;
}

QoeCategory categorize(double qoe, const CategoryBounds& bounds) {
  if (qoe < bounds.b1) return QoeCategory::Poor;
  if (qoe < bounds.b2) return QoeCategory::Average;
  if (qoe < bounds.b3) return QoeCategory::Good;
  return QoeCategory::Excellent;
}

Vec cell_features(const netsim::CellKpiReport& r) {
  return {r.throughput_bps, r.meas_period_prb_khz, static_cast<double>(r.num_ues),
          static_cast<double>(r.new_ues), static_cast<double>(r.left_ues)};
}

SubstituteModel train_substitute(const SubstituteDataset& dataset, const SubstituteConfig& cfg,
                                 const std::optional<std::array<double, 3>>& fixed_bounds,
                                 std::uint64_t seed) {
  if (dataset.size() < cfg.min_samples) {
    throw std::invalid_argument("train_substitute: need at least " +
                                std::to_string(cfg.min_samples) + " samples, have " +
                                std::to_string(dataset.size()));
  }

  const std::size_t n = dataset.size();
  const auto holdout = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                    std::floor(cfg.holdout_fraction * static_cast<double>(n))));
  const std::size_t n_train = n - holdout;

  std::vector<Vec> train_x(dataset.features.begin(),
                           dataset.features.begin() + static_cast<std::ptrdiff_t>(n_train));
  Vec train_y(dataset.labels.begin(), dataset.labels.begin() + static_cast<std::ptrdiff_t>(n_train));

  SubstituteModel model;
  model.scaler.fit(train_x);
  model.label_mean = mean(train_y);
  model.label_std = stddev_pop(train_y);
  if (model.label_std == 0.0) model.label_std = 1.0;

  if (fixed_bounds) {
    model.bounds = CategoryBounds{(*fixed_bounds)[0], (*fixed_bounds)[1], (*fixed_bounds)[2]};
  } else {
    model.bounds = CategoryBounds::from_quartiles(train_y);
  }

  std::vector<Vec> xs_std;
  xs_std.reserve(n_train);
  for (const auto& x : train_x) xs_std.push_back(model.scaler.apply(x));
  std::vector<Vec> ys_std;
  ys_std.reserve(n_train);
  for (double y : train_y) ys_std.push_back({(y - model.label_mean) / model.label_std});

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    model.net = nn::Mlp({5, cfg.hidden, cfg.hidden, 1}, nn::Activation::Tanh,
                        derive_seed(seed, 0x73756200ULL + static_cast<std::uint64_t>(attempt)));
    nn::TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch = 32;
    tc.lr = cfg.lr;
    tc.seed = derive_seed(seed, 0x73756254ULL + static_cast<std::uint64_t>(attempt));
    nn::train_mlp(model.net, xs_std, ys_std, tc);

    std::size_t agree = 0;
    for (std::size_t i = n_train; i < n; ++i) {
      const int predicted = model.category_raw(dataset.features[i]);
      const int actual = static_cast<int>(categorize(dataset.labels[i], model.bounds));
      if (predicted == actual) ++agree;
    }
    model.holdout_agreement = static_cast<double>(agree) / static_cast<double>(holdout);
    if (model.holdout_agreement >= cfg.agreement_min) return model;
  }
  throw AgreementError("train_substitute: categorical agreement " +
                       std::to_string(model.holdout_agreement) + " below " +
                       std::to_string(cfg.agreement_min) + " after " +
                       std::to_string(cfg.max_attempts) + " attempts");
}

namespace {

struct BudgetExhausted {};

struct QueryCounter {
  const CategorizerFn& fn;
  const AttackBudget& budget;
  int count = 0;
  int last_cat = -1;

  bool in_region(const Vec& x, int target_cat) {
    if (count >= budget.query_budget) throw BudgetExhausted{};
    ++count;
    last_cat = fn(x);
    return last_cat >= target_cat;
  }
};

Vec clamp_box(Vec x, const AttackBudget& budget) {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], budget.box_lo[j], budget.box_hi[j]);
  return x;
}

Vec midpoint(const Vec& a, const Vec& b) {
  Vec m(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) m[j] = 0.5 * (a[j] + b[j]);
  return m;
}

}  // namespace

CraftOutcome craft_adversarial(const CategorizerFn& categorizer, const Vec& r_std, int target_cat,
                               const std::vector<Vec>& init_pool, const AttackBudget& budget,
                               const HsjConfig& hsj, std::uint64_t seed) {
  const std::size_t dim = r_std.size();
  CraftOutcome out;
  out.r_std = r_std;
  out.target_cat = target_cat;

  QueryCounter oracle{categorizer, budget};
  Rng rng(derive_seed(seed, 0x68736a21ULL));

  Vec best;          // closest in-region point found so far
  int best_cat = -1;

  // binary search along the segment [r_std, inside]; both ends stay clamped
  auto pull_to_boundary = [&](Vec inside, int inside_cat) {
    Vec lo = r_std;
    while (l2_dist(lo, inside) > hsj.bin_search_tol) {
      Vec mid = midpoint(lo, inside);
      if (oracle.in_region(mid, target_cat)) {
        inside = std::move(mid);
        inside_cat = oracle.last_cat;
      } else {
        lo = std::move(mid);
      }
    }
    if (best.empty() || l2_dist(inside, r_std) < l2_dist(best, r_std)) {
      best = inside;
      best_cat = inside_cat;
    }
  };

  try {
    // precondition short-circuit: the report may already sit in the target bin
    if (oracle.in_region(r_std, target_cat)) {
      out.success = true;
      out.adv_std = r_std;
      out.delta_std.assign(dim, 0.0);
      out.delta_norm = 0.0;
      out.original_cat = oracle.last_cat;
      out.achieved_cat = oracle.last_cat;
      out.query_count = oracle.count;
      return out;
    }
    out.original_cat = oracle.last_cat;

    // initialization: nearest known in-target sample
    Vec init;
    int init_cat = -1;
    double init_dist = 0.0;
    for (const auto& cand : init_pool) {
      const Vec clamped = clamp_box(cand, budget);
      if (!oracle.in_region(clamped, target_cat)) continue;
      const double d = l2_dist(clamped, r_std);
      if (init.empty() || d < init_dist) {
        init = clamped;
        init_cat = oracle.last_cat;
        init_dist = d;
      }
    }
    if (init.empty()) {
      out.query_count = oracle.count;
      throw NoInitSample("craft_adversarial: no sample of the target category available");
    }

    pull_to_boundary(init, init_cat);

    for (int it = 1; it <= hsj.iterations; ++it) {
      const double dist = l2_dist(best, r_std);
      if (dist <= hsj.bin_search_tol) break;

      // Monte Carlo direction estimate from label indicators around the boundary
      const double probe = std::max(dist / static_cast<double>(dim), hsj.bin_search_tol);
      std::vector<Vec> dirs;
      Vec signs;
      dirs.reserve(static_cast<std::size_t>(hsj.direction_samples));
      double mean_sign = 0.0;
      for (int b = 0; b < hsj.direction_samples; ++b) {
        Vec u = rng.unit_vector(dim);
        Vec probe_pt = best;
        axpy(probe_pt, probe, u);
        const double phi = oracle.in_region(clamp_box(std::move(probe_pt), budget), target_cat)
                               ? 1.0
                               : -1.0;
        mean_sign += phi;
        signs.push_back(phi);
        dirs.push_back(std::move(u));
      }
      mean_sign /= static_cast<double>(hsj.direction_samples);

      Vec direction(dim, 0.0);
      if (std::fabs(mean_sign) >= 1.0) {
        // all probes agreed; move along (or против) their average direction
        for (const auto& u : dirs) axpy(direction, mean_sign, u);
      } else {
        for (std::size_t b = 0; b < dirs.size(); ++b) axpy(direction, signs[b] - mean_sign, dirs[b]);
      }
      const double dn = l2_norm(direction);
      if (dn < 1e-12) continue;
      for (auto& v : direction) v /= dn;

      // geometric step-size search from the boundary point
      double step = dist / std::sqrt(static_cast<double>(it));
      Vec candidate;
      int candidate_cat = -1;
      while (step > hsj.bin_search_tol * 1e-3) {
        Vec probe_pt = best;
        axpy(probe_pt, step, direction);
        probe_pt = clamp_box(std::move(probe_pt), budget);
        if (oracle.in_region(probe_pt, target_cat)) {
          candidate = std::move(probe_pt);
          candidate_cat = oracle.last_cat;
          break;
        }
        step *= 0.5;
      }
      if (candidate.empty()) continue;
      pull_to_boundary(std::move(candidate), candidate_cat);
    }
  } catch (const BudgetExhausted&) {
    // fall through with whatever best-so-far we have
  }

  out.query_count = oracle.count;
  if (best.empty()) {
    out.failure_reason = "budget_exhausted";
    return out;
  }
  out.adv_std = best;
  out.achieved_cat = best_cat;
  out.delta_std.resize(dim);
  for (std::size_t j = 0; j < dim; ++j) out.delta_std[j] = best[j] - r_std[j];
  out.delta_norm = l2_norm(out.delta_std);
  if (out.delta_norm > budget.max_l2) {
    out.failure_reason = "max_l2_exceeded";
    return out;
  }
  out.success = true;
  return out;
}

netsim::KpiReportBatch inject(const netsim::KpiReportBatch& batch,
                              const std::map<std::string, AdversarialReport>& crafted,
                              int total_ues, std::vector<InjectIncident>* incidents) {
  netsim::KpiReportBatch out = batch;
  for (auto& rep : out.cell_reports) {
    auto it = crafted.find(rep.cell_id);
    if (it == crafted.end()) continue;
    const auto& adv = it->second;

    netsim::CellKpiReport lie = rep;
    lie.throughput_bps = adv.perturbed_raw[0];
    lie.meas_period_prb_khz = adv.perturbed_raw[1];
    lie.num_ues = static_cast<int>(std::lround(adv.perturbed_raw[2]));
    lie.new_ues = static_cast<int>(std::lround(adv.perturbed_raw[3]));
    lie.left_ues = static_cast<int>(std::lround(adv.perturbed_raw[4]));

    std::string reason;
    if (!(lie.throughput_bps >= 0.0) || !std::isfinite(lie.throughput_bps)) {
      reason = "negative or non-finite throughput";
    } else if (!(lie.meas_period_prb_khz > 0.0)) {
      reason = "non-positive meas period";
    } else if (lie.num_ues < 0 || lie.num_ues > total_ues || lie.new_ues < 0 ||
               lie.new_ues > total_ues || lie.left_ues < 0 || lie.left_ues > total_ues) {
      reason = "count outside [0, total_ues]";
    } else if (std::abs(lie.num_ues - rep.num_ues) > total_ues) {
      reason = "implausible num_ues delta";
    }

    if (!reason.empty()) {
      if (incidents) incidents->push_back({batch.iteration, rep.cell_id, reason});
      continue;  // keep the original report
    }
    rep = lie;
  }
  return out;
}

ApateAttacker::ApateAttacker(const AttackConfig& attack_cfg, const RicConfig& ric_cfg,
                             std::string cell_id, int total_ues, double max_throughput_bps,
                             double meas_period_khz, std::uint64_t seed)
    : cfg_(attack_cfg),
      ric_cfg_(ric_cfg),
      cell_id_(std::move(cell_id)),
      total_ues_(total_ues),
      max_throughput_bps_(max_throughput_bps),
      meas_period_khz_(meas_period_khz),
      seed_(seed) {}

std::optional<double> ApateAttacker::local_label() const {
  const auto needed = static_cast<std::size_t>(
      std::max<std::int64_t>(ric_cfg_.min_history,
                             static_cast<std::int64_t>(ric_cfg_.var_order) * 2 + ric_cfg_.var_order + 1));
  if (own_series_.size() < needed) return std::nullopt;
  const std::size_t window = std::min<std::size_t>(own_series_.size(),
                                                   static_cast<std::size_t>(ric_cfg_.fit_window));
  const std::vector<Vec> recent(own_series_.end() - static_cast<std::ptrdiff_t>(window),
                                own_series_.end());
  try {
    const auto model = ric::var_fit(recent, ric_cfg_.var_order);
    return model.forecast(recent, ric_cfg_.forecast_horizon)[1];
  } catch (const ric::InsufficientHistory&) {
    return std::nullopt;
  }
}

void ApateAttacker::observe(const netsim::CellKpiReport& own_true,
                            const std::vector<netsim::UeKpiReport>& own_ues, std::int64_t t) {
  double mean_thp = 0.0;
  for (const auto& u : own_ues) mean_thp += u.pdcp_thp_dl;
  if (!own_ues.empty()) mean_thp /= static_cast<double>(own_ues.size());
  const double agg = own_true.throughput_bps / std::max(1, own_true.num_ues);
  own_series_.push_back({mean_thp, agg});

  if (t >= cfg_.start_iteration) return;  // dataset frozen once the attack begins
  std::optional<double> label;
  if (cfg_.oracle_mode == "exact_oracle") {
    if (oracle_) label = oracle_(cell_features(own_true));
  } else {
    label = local_label();
  }
  if (label) {
    dataset_.features.push_back(cell_features(own_true));
    dataset_.labels.push_back(*label);
  }
}

void ApateAttacker::train_if_due(std::int64_t t) {
  if (substitute_ || t != cfg_.start_iteration) return;
  substitute_ = train_substitute(dataset_, cfg_.substitute, cfg_.category_boundaries,
                                 derive_seed(seed_, 0x74726e00ULL));
}

std::optional<AdversarialReport> ApateAttacker::craft(const netsim::CellKpiReport& own_true,
                                                      std::int64_t t) {
  if (!substitute_ || t < cfg_.start_iteration) return std::nullopt;
  const auto& sub = *substitute_;

  const Vec raw = cell_features(own_true);
  const Vec r_std = sub.scaler.apply(raw);
  const int orig_cat = sub.category_std(r_std);
  if (orig_cat >= static_cast<int>(QoeCategory::Excellent)) {
    ++skipped_top_category_;
    return std::nullopt;
  }
  const int target_cat = orig_cat + 1;

  AttackBudget budget;
  budget.max_l2 = cfg_.hsj.max_l2;
  budget.query_budget = cfg_.hsj.query_budget;
  const Vec lo_raw = {0.0, 1e-6, 0.0, 0.0, 0.0};
  const Vec hi_raw = {static_cast<double>(total_ues_) * max_throughput_bps_,
                      meas_period_khz_ * 2.0, static_cast<double>(total_ues_),
                      static_cast<double>(total_ues_), static_cast<double>(total_ues_)};
  budget.box_lo = sub.scaler.apply(lo_raw);
  budget.box_hi = sub.scaler.apply(hi_raw);

  std::vector<Vec> init_pool;
  init_pool.reserve(dataset_.size());
  for (const auto& f : dataset_.features) init_pool.push_back(sub.scaler.apply(f));

  CraftRecord record;
  record.iteration = t;
  record.cell_id = cell_id_;
  record.original_cat = orig_cat;

  CraftOutcome outcome;
  try {
    outcome = craft_adversarial([&sub](const Vec& x) { return sub.category_std(x); }, r_std,
                                target_cat, init_pool, budget, cfg_.hsj,
                                derive_seed(seed_, 0x63726166ULL + static_cast<std::uint64_t>(t)));
  } catch (const NoInitSample&) {
    record.failure_reason = "no_init_sample";
    records_.push_back(record);
    return std::nullopt;
  }

  record.success = outcome.success;
  record.delta_norm = outcome.delta_norm;
  record.query_count = outcome.query_count;
  record.achieved_cat = outcome.achieved_cat;
  record.failure_reason = outcome.failure_reason;
  records_.push_back(record);
  if (!outcome.success) return std::nullopt;

  AdversarialReport adv;
  adv.original = own_true;
  adv.perturbed_raw = sub.scaler.unapply(outcome.adv_std);
  adv.delta_std = outcome.delta_std;
  adv.delta_norm = outcome.delta_norm;
  adv.original_cat = outcome.original_cat;
  adv.achieved_cat = outcome.achieved_cat;
  adv.query_count = outcome.query_count;
  return adv;
}

}  // namespace steerlab::attack
