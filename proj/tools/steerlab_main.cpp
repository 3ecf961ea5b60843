// steerlab CLI: closed-loop traffic-steering scenarios, adversarial-KPI
// attack experiments, and detector training/evaluation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "steerlab/harness/experiment.hpp"
#include "steerlab/harness/loop.hpp"
#include "steerlab/harness/metrics.hpp"
#include "steerlab/marrs/pipeline.hpp"

namespace fs = std::filesystem;
using namespace steerlab;

namespace {

ScenarioConfig load_or_default(const std::string& config_path, std::optional<std::uint64_t> seed,
                               std::optional<std::string> mode) {
  ScenarioConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (mode) cfg.mode = *mode;
  cfg.validate();
  return cfg;
}

fs::path ensure_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

void write_craft_csv(const std::vector<attack::CraftRecord>& records, const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << "iteration,cell,success,delta_norm,queries,original_cat,achieved_cat,failure_reason\n";
  for (const auto& r : records) {
    f << r.iteration << "," << r.cell_id << "," << (r.success ? 1 : 0) << ","
      << harness::format_double(r.delta_norm) << "," << r.query_count << "," << r.original_cat
      << "," << r.achieved_cat << "," << r.failure_reason << "\n";
  }
}

void write_sweep_csv(const std::vector<harness::SweepRow>& rows, const fs::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << "config,k,rule,accuracy,precision,recall,f1\n";
  for (const auto& r : rows) {
    f << r.label << "," << r.k << "," << r.rule << ","
      << harness::format_double(r.metrics.accuracy()) << ","
      << harness::format_double(r.metrics.precision()) << ","
      << harness::format_double(r.metrics.recall()) << ","
      << harness::format_double(r.metrics.f1()) << "\n";
  }
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> mode, const std::string& out) {
  const auto cfg = load_or_default(config_path, seed, mode);
  const auto dir = ensure_dir(out);

  const auto result = harness::run_scenario(cfg);
  if (result.aborted) {
    std::cerr << "run aborted: " << result.diagnostic << "\n";
  }
  harness::export_per_iteration_csv(result.metrics, (dir / "per_iteration.csv").string());
  harness::export_manifest(cfg, cfg.attack.enabled ? "attack" : "benign",
                           (dir / "manifest.json").string());
  if (!result.craft_records.empty()) write_craft_csv(result.craft_records, dir / "craft_records.csv");

  std::cout << "run: " << result.metrics.iterations << " iterations, mode " << cfg.mode << "\n";
  for (const auto& cell : result.metrics.cell_ids) {
    std::cout << "  " << cell << " mean " << harness::format_double(result.metrics.mean_count(cell))
              << " min " << result.metrics.min_count(cell) << " max "
              << result.metrics.max_count(cell) << "\n";
  }
  std::cout << "wrote " << (dir / "per_iteration.csv").string() << "\n";
  return result.aborted ? 1 : 0;
}

int cmd_attack(const std::string& config_path, std::uint64_t seed, const std::string& scenario,
               const std::string& out) {
  auto base = load_or_default(config_path, seed, std::nullopt);
  const auto dir = ensure_dir(out);

  const auto& cells = scenario == "mas" ? base.attack.mas_cells : base.attack.sas_cells;
  const auto benign_cfg = harness::make_benign_config(base);
  const auto attack_cfg = harness::make_attack_config(base, cells);

  const auto benign = harness::run_scenario(benign_cfg);
  const auto malicious = harness::run_scenario(attack_cfg);
  if (benign.aborted || malicious.aborted) {
    std::cerr << "attack experiment aborted: "
              << (benign.aborted ? benign.diagnostic : malicious.diagnostic) << "\n";
    return 1;
  }

  const auto gains = harness::compute_attack_gain(benign.metrics, malicious.metrics);
  harness::export_per_iteration_csv(benign.metrics, (dir / "per_iteration_benign.csv").string());
  harness::export_per_iteration_csv(malicious.metrics,
                                    (dir / ("per_iteration_" + scenario + ".csv")).string());
  harness::export_attack_gain_csv(gains, (dir / "attack_gain.csv").string());
  harness::export_manifest(base, scenario, (dir / "manifest.json").string());
  write_craft_csv(malicious.craft_records, dir / "craft_records.csv");

  std::cout << "paired " << scenario << " experiment (seed " << seed << ")\n";
  std::cout << "cell  benign_mean  malicious_mean  diff%\n";
  for (const auto& [cell, g] : gains) {
    std::cout << "  " << cell << "  " << harness::format_double(g.benign_mean) << "  "
              << harness::format_double(g.malicious_mean) << "  "
              << harness::format_double(g.diff_pct) << "\n";
  }
  return 0;
}

int cmd_train_detect(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  auto base = load_or_default(config_path, seed, std::nullopt);
  const auto dir = ensure_dir(out);

  const auto benign_cfg = harness::make_benign_config(base);
  const auto benign = harness::run_scenario(benign_cfg);
  if (benign.aborted) {
    std::cerr << "benign run aborted: " << benign.diagnostic << "\n";
    return 1;
  }

  const std::int64_t T = base.iterations;
  const auto W = base.detection.window_len;
  const auto train_t_end = static_cast<std::int64_t>(
      std::floor(static_cast<double>(T) * base.detection.train_fraction));
  const auto cells = base.cell_ids();

  const auto scaler = marrs::fit_standardizer(benign.store, cells, 0, train_t_end - 1);
  std::map<std::string, std::vector<marrs::FeatureWindow>> train_windows;
  for (const auto& cell : cells) {
    train_windows[cell] = marrs::extract_features(benign.store, cell, 0, train_t_end - 1, scaler, W);
  }
  const auto pipeline =
      marrs::MarrsPipeline::train(train_windows, base.detection, scaler, derive_seed(seed, 0x6d727331ULL));

  // threshold: max-F1 needs labeled positives, so calibration borrows an SAS run
  double threshold = 0.0;
  if (base.detection.threshold_policy == "max_f1") {
    const auto sas_cfg = harness::make_attack_config(base, base.attack.sas_cells);
    const auto sas = harness::run_scenario(sas_cfg);
    if (sas.aborted) {
      std::cerr << "calibration run aborted: " << sas.diagnostic << "\n";
      return 1;
    }
    const auto universe = harness::build_universe(benign, sas, sas, cells, train_t_end, T, W);
    const auto items = harness::select_items(base, cells, base.attack.sas_cells,
                                             base.attack.sas_cells, train_t_end);
    Vec losses;
    std::vector<int> labels;
    for (const auto& it : items.validation) {
      losses.push_back(pipeline.loss(
          it.cell, universe.runs[static_cast<std::size_t>(it.run)].aligned_at(it.start)));
      labels.push_back(it.truth);
    }
    threshold = harness::calibrate_threshold(losses, labels, base.detection);
  } else {
    Vec losses;
    for (const auto& cell : cells) {
      const auto val_windows =
          marrs::extract_features(benign.store, cell, 0, T - 1, scaler, W);
      for (std::int64_t s = train_t_end; s + static_cast<std::int64_t>(W) <= T; ++s) {
        std::map<std::string, marrs::FeatureWindow> aligned;
        for (const auto& c2 : cells) {
          const auto ws = marrs::extract_features(benign.store, c2, 0, T - 1, scaler, W);
          aligned.emplace(c2, ws[static_cast<std::size_t>(s)]);
        }
        losses.push_back(pipeline.loss(cell, aligned));
      }
    }
    threshold = marrs::calibrate_benign_quantile(losses, base.detection.benign_quantile);
  }

  const auto bundle_path = (dir / "marrs_bundle.slmc").string();
  pipeline.save(bundle_path, threshold, base.detection.threshold_policy);
  harness::export_manifest(base, "train-detect", (dir / "manifest.json").string());
  std::cout << "trained MARRS pipeline over " << train_t_end << " benign iterations\n";
  std::cout << "threshold (" << base.detection.threshold_policy
            << "): " << harness::format_double(threshold) << "\n";
  std::cout << "bundle: " << bundle_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  const auto base = load_or_default(config_path, seed, std::nullopt);
  const auto dir = ensure_dir(out);

  const auto report = harness::run_evaluation(base);

  harness::export_per_iteration_csv(report.benign_metrics,
                                    (dir / "per_iteration_benign.csv").string());
  harness::export_per_iteration_csv(report.sas_metrics, (dir / "per_iteration_sas.csv").string());
  harness::export_per_iteration_csv(report.mas_metrics, (dir / "per_iteration_mas.csv").string());
  harness::export_attack_gain_csv(report.sas_gain, (dir / "attack_gain_sas.csv").string());
  harness::export_attack_gain_csv(report.mas_gain, (dir / "attack_gain_mas.csv").string());
  harness::export_detection_csv(report.benchmark_rows, (dir / "detection_benchmarks.csv").string());
  harness::export_detection_csv(report.ablation_rows, (dir / "detection_ablation.csv").string());
  harness::export_detection_csv(report.time_rows, (dir / "detection_over_time.csv").string());
  write_sweep_csv(report.sweep_rows, dir / "sequence_sweep.csv");
  write_craft_csv(report.sas_craft_records, dir / "craft_records_sas.csv");
  write_craft_csv(report.mas_craft_records, dir / "craft_records_mas.csv");
  harness::export_manifest(base, "evaluate", (dir / "manifest.json").string());

  std::cout << "attack gains (SAS):\n";
  for (const auto& [cell, g] : report.sas_gain) {
    std::cout << "  " << cell << ": " << harness::format_double(g.diff_pct) << "%\n";
  }
  std::cout << "detection (test set):\n";
  for (const auto& r : report.benchmark_rows) {
    std::cout << "  " << r.name << ": F1 " << harness::format_double(r.metrics.f1()) << " recall "
              << harness::format_double(r.metrics.recall()) << " precision "
              << harness::format_double(r.metrics.precision()) << "\n";
  }
  std::cout << "artifacts in " << dir.string() << "\n";
  return 0;
}

int cmd_sweep_seq(const std::string& config_path, std::uint64_t seed, const std::string& out,
                  std::vector<std::size_t> ks) {
  const auto base = load_or_default(config_path, seed, std::nullopt);
  const auto dir = ensure_dir(out);

  harness::EvaluationOptions opts;
  opts.with_benchmarks = false;
  opts.with_ablation = false;
  opts.with_time_study = false;
  if (!ks.empty()) opts.sweep_ks = std::move(ks);

  const auto report = harness::run_evaluation(base, opts);
  write_sweep_csv(report.sweep_rows, dir / "sequence_sweep.csv");
  harness::export_manifest(base, "sweep-seq", (dir / "manifest.json").string());

  std::cout << "config  precision  recall  f1\n";
  for (const auto& r : report.sweep_rows) {
    std::cout << "  " << r.label << "  " << harness::format_double(r.metrics.precision()) << "  "
              << harness::format_double(r.metrics.recall()) << "  "
              << harness::format_double(r.metrics.f1()) << "\n";
  }
  std::cout << "wrote " << (dir / "sequence_sweep.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop O-RAN traffic-steering lab: KPI evasion attack and detection"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", scenario = "sas", mode;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<std::size_t> ks;

  auto add_common = [&](CLI::App* sub, bool seed_required) {
    sub->add_option("--config", config_path, "Scenario config JSON (built-in defaults if omitted)");
    auto* s = sub->add_option("--seed", seed, "Run seed")->each([&](const std::string&) {
      seed_set = true;
    });
    if (seed_required) s->required();
    sub->add_option("--out", out_dir, "Output directory");
  };

  auto* run = app.add_subcommand("run", "One closed-loop scenario as configured");
  add_common(run, false);
  run->add_option("--mode", mode, "Override loop mode: in_process or split");

  auto* atk = app.add_subcommand("attack", "Paired benign/malicious runs with a gain table");
  add_common(atk, true);
  atk->add_option("--scenario", scenario, "sas or mas")->check(CLI::IsMember({"sas", "mas"}));

  auto* train = app.add_subcommand("train-detect", "Train the detection pipeline on a benign run");
  add_common(train, true);

  auto* eval = app.add_subcommand("evaluate", "Full experiment: benign, train, SAS, MAS, evaluate");
  add_common(eval, true);

  auto* sweep = app.add_subcommand("sweep-seq", "Sequence-rule sweep over the trained detector");
  add_common(sweep, true);
  sweep->add_option("--ks", ks, "Sequence lengths to sweep (default 3 5 7)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, seed_set ? std::optional(seed) : std::nullopt,
                     mode.empty() ? std::nullopt : std::optional(mode), out_dir);
    }
    if (atk->parsed()) return cmd_attack(config_path, seed, scenario, out_dir);
    if (train->parsed()) return cmd_train_detect(config_path, seed, out_dir);
    if (eval->parsed()) return cmd_evaluate(config_path, seed, out_dir);
    if (sweep->parsed()) return cmd_sweep_seq(config_path, seed, out_dir, ks);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
