#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "steerlab/config.hpp"
#include "steerlab/marrs/features.hpp"
#include "steerlab/nn/optimizer.hpp"

namespace steerlab::marrs {

/// Own-cell embedding concatenated with the mean of every other cell's
/// embedding for the same window. Throws if any expected cell is missing or
/// the embeddings are ragged.
std::map<std::string, Vec> build_x2(const std::map<std::string, Vec>& embeddings,
                                    const std::vector<std::string>& expected_cells);

/// Loss threshold calibration.
double calibrate_max_f1(const Vec& losses, const std::vector<int>& labels);
double calibrate_benign_quantile(const Vec& benign_losses, double q);

/// Window classification: untrusted (1) iff loss >= threshold.
inline int classify_loss(double loss, double threshold) { return loss >= threshold ? 1 : 0; }

enum class SequenceRule { All, Majority };

/// Sequence verdict over k window labels: Majority is untrusted iff the
/// untrusted count reaches (k+1)/2, All iff every window is untrusted.
int classify_sequence(const std::vector<int>& labels, SequenceRule rule);

struct Verdict {
  double loss = 0.0;
  int label = 0;  // 0 trusted, 1 untrusted
};

/// Two-stage per-cell LSTM-autoencoder pipeline: AE1 learns each cell's own
/// feature windows; AE2 consumes the cross-network enriched code and
/// reconstructs the original features.
class MarrsPipeline {
 public:
  static MarrsPipeline train(const std::map<std::string, std::vector<FeatureWindow>>& train_windows,
                             const DetectionConfig& cfg, const Standardizer& scaler,
                             std::uint64_t seed);

  Vec embed(const std::string& cell, const FeatureWindow& window) const;

  /// Reconstruction loss for `cell`'s window given the aligned windows of all
  /// cells at the same start.
  double loss(const std::string& cell, const std::map<std::string, FeatureWindow>& aligned) const;

  /// First-stage-only reconstruction loss (the AE1 ablation).
  double loss_ae1(const std::string& cell, const FeatureWindow& window) const;

  Verdict classify(const std::string& cell, const std::map<std::string, FeatureWindow>& aligned,
                   double threshold) const;

  const std::vector<std::string>& cells() const { return cells_; }
  const Standardizer& scaler() const { return scaler_; }
  const DetectionConfig& config() const { return cfg_; }
  bool models_cell(const std::string& cell) const { return ae1_.count(cell) > 0; }

  std::uint64_t fingerprint() const;

  void save(const std::string& path, double threshold, const std::string& policy) const;

  /// Refuses to load when the stored feature schema, window geometry, or cell
  /// set does not match the expectation.
  static MarrsPipeline load(const std::string& path, const DetectionConfig& expected_cfg,
                            const std::vector<std::string>& expected_cells, double* threshold,
                            std::string* policy);

 private:
  DetectionConfig cfg_;
  std::vector<std::string> cells_;
  Standardizer scaler_;
  std::map<std::string, nn::Seq2SeqAe> ae1_;
  std::map<std::string, nn::Seq2SeqAe> ae2_;
};

/// Ablation variant: one AE per cell over the cell's own window concatenated
/// with the mean of the other cells' raw feature rows (22 columns in,
/// 11 reconstructed).
class Ae1PlusModel {
 public:
  static Ae1PlusModel train(const std::map<std::string, std::vector<FeatureWindow>>& train_windows,
                            const DetectionConfig& cfg, std::uint64_t seed);

  double loss(const std::string& cell, const std::map<std::string, FeatureWindow>& aligned) const;

  static std::vector<Vec> enriched_rows(const std::string& cell,
                                        const std::map<std::string, FeatureWindow>& aligned);

 private:
  std::map<std::string, nn::Seq2SeqAe> models_;
};

}  // namespace steerlab::marrs
