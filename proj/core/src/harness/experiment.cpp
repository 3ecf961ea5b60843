#include "steerlab/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

#include "steerlab/anomaly/iforest.hpp"
#include "steerlab/anomaly/linear_ae.hpp"
#include "steerlab/anomaly/ocsvm.hpp"

namespace steerlab::harness {

ScenarioConfig make_benign_config(ScenarioConfig base) {
  base.attack.enabled = false;
  for (auto& c : base.topology.cells) c.malicious = false;
  return base;
}

ScenarioConfig make_attack_config(ScenarioConfig base, const std::vector<std::string>& cells) {
  base.attack.enabled = true;
  for (auto& c : base.topology.cells) {
    c.malicious = std::find(cells.begin(), cells.end(), c.id) != cells.end();
  }
  base.validate();
  return base;
}

std::map<std::string, marrs::FeatureWindow> RunWindowSet::aligned_at(std::int64_t start) const {
  std::map<std::string, marrs::FeatureWindow> out;
  for (const auto& [cell, windows] : per_cell) {
    if (start < 0 || start >= static_cast<std::int64_t>(windows.size())) {
      throw std::out_of_range("RunWindowSet: window start " + std::to_string(start) +
                              " outside " + name);
    }
    out.emplace(cell, windows[static_cast<std::size_t>(start)]);
  }
  return out;
}

std::map<std::string, marrs::FeatureWindow> RunWindowSet::aligned_at(const std::string&,
                                                                     std::int64_t start) const {
  return aligned_at(start);
}

WindowUniverse build_universe(const RunResult& benign, const RunResult& sas, const RunResult& mas,
                              const std::vector<std::string>& cells, std::int64_t train_t_end,
                              std::int64_t total_iterations, std::size_t window_len) {
  WindowUniverse u;
  u.scaler = marrs::fit_standardizer(benign.store, cells, 0, train_t_end - 1);

  for (const auto& cell : cells) {
    u.train_windows[cell] =
        marrs::extract_features(benign.store, cell, 0, train_t_end - 1, u.scaler, window_len);
  }

  const RunResult* runs[3] = {&benign, &sas, &mas};
  const char* names[3] = {"benign", "sas", "mas"};
  for (int r = 0; r < 3; ++r) {
    u.runs[r].name = names[r];
    for (const auto& cell : cells) {
      u.runs[r].per_cell[cell] = marrs::extract_features(runs[r]->store, cell, 0,
                                                         total_iterations - 1, u.scaler, window_len);
    }
  }
  return u;
}

namespace {

std::vector<std::size_t> even_sample(std::size_t pool, std::size_t want) {
  std::vector<std::size_t> idx;
  if (pool == 0 || want == 0) return idx;
  if (want >= pool) {
    idx.resize(pool);
    for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
    return idx;
  }
  idx.reserve(want);
  for (std::size_t i = 0; i < want; ++i) idx.push_back(i * pool / want);
  return idx;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

ItemSets select_items(const ScenarioConfig& cfg, const std::vector<std::string>& cells,
                      const std::vector<std::string>& sas_malicious,
                      const std::vector<std::string>& mas_malicious, std::int64_t train_t_end) {
  const std::int64_t T = cfg.iterations;
  const auto W = static_cast<std::int64_t>(cfg.detection.window_len);
  const std::int64_t last_start = T - W;
  const std::int64_t attack_start = cfg.attack.start_iteration;

  ItemSets out;

  // benign validation: the benign run's holdout span
  std::vector<EvalItem> benign_val;
  for (const auto& cell : cells) {
    for (std::int64_t s = train_t_end; s <= last_start; ++s) benign_val.push_back({0, cell, s, 0});
  }

  // positives: windows fully inside the attack span, halved chronologically
  std::vector<EvalItem> pos_val_pool, pos_test_pool;
  const std::vector<std::string>* mal_sets[2] = {&sas_malicious, &mas_malicious};
  for (int r = 1; r <= 2; ++r) {
    for (const auto& cell : *mal_sets[r - 1]) {
      std::vector<std::int64_t> starts;
      for (std::int64_t s = attack_start; s <= last_start; ++s) starts.push_back(s);
      const std::size_t half = starts.size() / 2;
      for (std::size_t i = 0; i < starts.size(); ++i) {
        (i < half ? pos_val_pool : pos_test_pool).push_back({r, cell, starts[i], 1});
      }
    }
  }

  // test negatives: honest cells across both attack runs, plus the malicious
  // cells' honest pre-attack windows
  std::vector<EvalItem> neg_test_pool;
  for (int r = 1; r <= 2; ++r) {
    const auto& malicious = *mal_sets[r - 1];
    for (const auto& cell : cells) {
      if (contains(malicious, cell)) {
        for (std::int64_t s = 0; s + W <= attack_start && s <= last_start; ++s) {
          neg_test_pool.push_back({r, cell, s, 0});
        }
      } else {
        for (std::int64_t s = 0; s <= last_start; ++s) neg_test_pool.push_back({r, cell, s, 0});
      }
    }
  }

  const double ratio = cfg.detection.test_benign_ratio;

  out.validation = benign_val;
  const auto pos_val_want = static_cast<std::size_t>(
      std::llround(static_cast<double>(benign_val.size()) / ratio));
  for (std::size_t i : even_sample(pos_val_pool.size(), std::max<std::size_t>(pos_val_want, 1))) {
    out.validation.push_back(pos_val_pool[i]);
  }

  out.test = pos_test_pool;
  const auto neg_test_want = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(pos_test_pool.size())));
  for (std::size_t i : even_sample(neg_test_pool.size(), neg_test_want)) {
    out.test.push_back(neg_test_pool[i]);
  }
  return out;
}

double calibrate_threshold(const Vec& val_losses, const std::vector<int>& val_labels,
                           const DetectionConfig& cfg) {
  if (cfg.threshold_policy == "benign_quantile") {
    Vec benign;
    for (std::size_t i = 0; i < val_losses.size(); ++i) {
      if (val_labels[i] == 0) benign.push_back(val_losses[i]);
    }
    return marrs::calibrate_benign_quantile(benign, cfg.benign_quantile);
  }
  return marrs::calibrate_max_f1(val_losses, val_labels);
}

namespace {

using LossFn = std::function<double(const EvalItem&)>;

struct ScoredItems {
  Vec losses;
  std::vector<int> labels;
};

ScoredItems score_items(const std::vector<EvalItem>& items, const LossFn& fn) {
  ScoredItems out;
  out.losses.reserve(items.size());
  out.labels.reserve(items.size());
  for (const auto& item : items) {
    out.losses.push_back(fn(item));
    out.labels.push_back(item.truth);
  }
  return out;
}

MethodScore evaluate_method(const std::string& name, const ItemSets& items, const LossFn& fn,
                            const DetectionConfig& cfg) {
  const auto val = score_items(items.validation, fn);
  const double threshold = calibrate_threshold(val.losses, val.labels, cfg);
  const auto test = score_items(items.test, fn);

  std::vector<int> verdicts;
  verdicts.reserve(test.losses.size());
  for (double l : test.losses) verdicts.push_back(marrs::classify_loss(l, threshold));

  MethodScore score;
  score.name = name;
  score.threshold = threshold;
  score.metrics = compute_detection_metrics(verdicts, test.labels);
  return score;
}

}  // namespace

EvaluationReport run_evaluation(const ScenarioConfig& base, const EvaluationOptions& opts) {
  base.validate();
  EvaluationReport report;

  const auto benign_cfg = make_benign_config(base);
  const auto sas_cfg = make_attack_config(base, base.attack.sas_cells);
  const auto mas_cfg = make_attack_config(base, base.attack.mas_cells);

  const auto t0 = std::chrono::steady_clock::now();
  RunResult benign = run_closed_loop(benign_cfg);
  RunResult sas = run_closed_loop(sas_cfg);
  report.attack_pair_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  RunResult mas = run_closed_loop(mas_cfg);

  for (const RunResult* r : {&benign, &sas, &mas}) {
    if (r->aborted) throw std::runtime_error("run_evaluation: scenario aborted: " + r->diagnostic);
  }

  report.benign_metrics = benign.metrics;
  report.sas_metrics = sas.metrics;
  report.mas_metrics = mas.metrics;
  report.sas_gain = compute_attack_gain(benign.metrics, sas.metrics);
  report.mas_gain = compute_attack_gain(benign.metrics, mas.metrics);
  report.sas_craft_records = sas.craft_records;
  report.mas_craft_records = mas.craft_records;
  report.sas_skipped_top = sas.skipped_top_category;

  const auto cells = base.cell_ids();
  const std::int64_t T = base.iterations;
  const std::size_t W = base.detection.window_len;
  const auto train_t_end =
      static_cast<std::int64_t>(std::floor(static_cast<double>(T) * base.detection.train_fraction));

  const auto items = select_items(base, cells, base.attack.sas_cells, base.attack.mas_cells,
                                  train_t_end);

  // main universe and pipeline (the full training set)
  WindowUniverse universe = build_universe(benign, sas, mas, cells, train_t_end, T, W);
  marrs::MarrsPipeline pipeline = marrs::MarrsPipeline::train(universe.train_windows,
                                                              base.detection, universe.scaler,
                                                              derive_seed(base.seed, 0x6d727331ULL));

  const LossFn marrs_fn = [&](const EvalItem& it) {
    return pipeline.loss(it.cell, universe.runs[static_cast<std::size_t>(it.run)].aligned_at(it.start));
  };
  const LossFn ae1_fn = [&](const EvalItem& it) {
    const auto& w = universe.runs[static_cast<std::size_t>(it.run)].per_cell.at(it.cell)
                        .at(static_cast<std::size_t>(it.start));
    return pipeline.loss_ae1(it.cell, w);
  };

  MethodScore marrs_score = evaluate_method("MARRS", items, marrs_fn, base.detection);
  report.marrs_threshold = marrs_score.threshold;

  // benchmark detectors over the flattened standardized windows
  std::vector<Vec> flat_train;
  for (const auto& [cell, windows] : universe.train_windows) {
    for (const auto& w : windows) flat_train.push_back(w.flattened());
  }
  const auto flat_of = [&](const EvalItem& it) {
    return universe.runs[static_cast<std::size_t>(it.run)].per_cell.at(it.cell)
        .at(static_cast<std::size_t>(it.start)).flattened();
  };

  if (opts.with_benchmarks) {
  anomaly::IForestParams if_params;
  const auto iforest = anomaly::iforest_fit(flat_train, if_params, derive_seed(base.seed, 0x69660aULL));
  const LossFn if_fn = [&](const EvalItem& it) { return anomaly::iforest_score(iforest, flat_of(it)); };

  anomaly::OcsvmParams svm_params;
  svm_params.nu = base.detection.ocsvm_nu;
  const auto ocsvm = anomaly::ocsvm_fit(flat_train, svm_params);
  const LossFn svm_fn = [&](const EvalItem& it) { return -anomaly::ocsvm_score(ocsvm, flat_of(it)); };

  anomaly::LinearAeParams lae_params;
  lae_params.latent_dim = base.detection.lae_latent_dim;
  const auto lae = anomaly::linear_ae_fit(flat_train, lae_params, derive_seed(base.seed, 0x6c6165ULL));
  const LossFn lae_fn = [&](const EvalItem& it) { return anomaly::linear_ae_loss(lae, flat_of(it)); };

  report.benchmark_rows.push_back(evaluate_method("IF", items, if_fn, base.detection));
  report.benchmark_rows.push_back(evaluate_method("OCSVM", items, svm_fn, base.detection));
  report.benchmark_rows.push_back(evaluate_method("LAE", items, lae_fn, base.detection));
  report.benchmark_rows.push_back(marrs_score);
  }

  // ablation: first stage only, then the raw-feature enrichment variant
  if (opts.with_ablation) {
  const auto ae1plus = marrs::Ae1PlusModel::train(universe.train_windows, base.detection,
                                                  derive_seed(base.seed, 0x61653170ULL));
  const LossFn ae1plus_fn = [&](const EvalItem& it) {
    return ae1plus.loss(it.cell, universe.runs[static_cast<std::size_t>(it.run)].aligned_at(it.start));
  };
  report.ablation_rows.push_back(evaluate_method("AE1", items, ae1_fn, base.detection));
  report.ablation_rows.push_back(evaluate_method("AE1PLUS", items, ae1plus_fn, base.detection));
  report.ablation_rows.push_back(marrs_score);
  report.ablation_rows.back().name = "MARRS";
  }

  // data-over-time study: cumulative training segments
  for (int s = 1; opts.with_time_study && s <= base.detection.segments; ++s) {
    std::string label = "x1";
    for (int q = 2; q <= s; ++q) label += "-x" + std::to_string(q);
    if (s == base.detection.segments) {
      MethodScore row = marrs_score;
      row.name = label;
      report.time_rows.push_back(row);
      continue;
    }
    const std::int64_t seg_end = train_t_end * s / base.detection.segments;
    WindowUniverse sub = build_universe(benign, sas, mas, cells, seg_end, T, W);
    const auto sub_pipeline = marrs::MarrsPipeline::train(
        sub.train_windows, base.detection, sub.scaler,
        derive_seed(base.seed, 0x6d727331ULL + static_cast<std::uint64_t>(s)));
    const LossFn sub_fn = [&](const EvalItem& it) {
      return sub_pipeline.loss(it.cell, sub.runs[static_cast<std::size_t>(it.run)].aligned_at(it.start));
    };
    report.time_rows.push_back(evaluate_method(label, items, sub_fn, base.detection));
  }

  // sequence sweep over consecutive same-truth windows, main pipeline + threshold
  struct SeqPoolEntry {
    std::vector<int> labels;
    std::vector<int> truths;
  };
  std::vector<SeqPoolEntry> pools;
  const std::vector<std::string>* mal_sets[2] = {&base.attack.sas_cells, &base.attack.mas_cells};
  const std::int64_t last_start = T - static_cast<std::int64_t>(W);
  const std::int64_t attack_start = base.attack.start_iteration;
  for (int r = 1; r <= 2; ++r) {
    for (const auto& cell : cells) {
      const bool is_malicious = contains(*mal_sets[r - 1], cell);
      // maximal consecutive spans of homogeneous ground truth
      std::vector<std::pair<std::int64_t, std::int64_t>> spans;  // [lo, hi] inclusive, truth from span
      if (is_malicious) {
        if (attack_start - static_cast<std::int64_t>(W) >= 0) {
          spans.push_back({0, attack_start - static_cast<std::int64_t>(W)});
        }
        const std::int64_t n_pos = last_start - attack_start + 1;
        const std::int64_t test_lo = attack_start + n_pos / 2;  // validation half excluded
        if (test_lo <= last_start) spans.push_back({test_lo, last_start});
      } else {
        spans.push_back({0, last_start});
      }
      for (const auto& [lo, hi] : spans) {
        SeqPoolEntry entry;
        for (std::int64_t s = lo; s <= hi; ++s) {
          EvalItem it{r, cell, s, 0};
          const double loss = marrs_fn(it);
          entry.labels.push_back(marrs::classify_loss(loss, marrs_score.threshold));
          const bool positive = is_malicious && s >= attack_start;
          entry.truths.push_back(positive ? 1 : 0);
        }
        pools.push_back(std::move(entry));
      }
    }
  }

  const auto sweep_metrics = [&](std::size_t k, marrs::SequenceRule rule) {
    std::vector<int> verdicts, truths;
    for (const auto& pool : pools) {
      if (pool.labels.size() < k) continue;
      for (std::size_t s = 0; s + k <= pool.labels.size(); ++s) {
        std::vector<int> window_labels(pool.labels.begin() + static_cast<std::ptrdiff_t>(s),
                                       pool.labels.begin() + static_cast<std::ptrdiff_t>(s + k));
        verdicts.push_back(marrs::classify_sequence(window_labels, rule));
        truths.push_back(pool.truths[s]);  // spans are truth-homogeneous
      }
    }
    return compute_detection_metrics(verdicts, truths);
  };

  for (std::size_t k : opts.sweep_ks) {
    report.sweep_rows.push_back(
        {std::to_string(k) + "A", k, "all", sweep_metrics(k, marrs::SequenceRule::All)});
    report.sweep_rows.push_back(
        {std::to_string(k) + "M", k, "majority", sweep_metrics(k, marrs::SequenceRule::Majority)});
  }
  report.sweep_rows.push_back({"1-MARRS", 1, "window", sweep_metrics(1, marrs::SequenceRule::Majority)});

  return report;
}

}  // namespace steerlab::harness
