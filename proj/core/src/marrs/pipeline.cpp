#include "steerlab/marrs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace steerlab::marrs {

std::map<std::string, Vec> build_x2(const std::map<std::string, Vec>& embeddings,
                                    const std::vector<std::string>& expected_cells) {
  if (expected_cells.size() < 2) throw std::invalid_argument("build_x2: need at least 2 cells");
  std::size_t dim = 0;
  for (const auto& cell : expected_cells) {
    auto it = embeddings.find(cell);
    if (it == embeddings.end()) throw std::invalid_argument("build_x2: missing embedding for " + cell);
    if (dim == 0) dim = it->second.size();
    if (it->second.size() != dim) throw std::invalid_argument("build_x2: ragged embeddings");
  }

  std::map<std::string, Vec> out;
  for (const auto& cell : expected_cells) {
    Vec agg(dim, 0.0);
    for (const auto& other : expected_cells) {
      if (other == cell) continue;
      axpy(agg, 1.0, embeddings.at(other));
    }
    const double inv = 1.0 / static_cast<double>(expected_cells.size() - 1);
    for (auto& v : agg) v *= inv;

    Vec x2 = embeddings.at(cell);
    x2.insert(x2.end(), agg.begin(), agg.end());
    out[cell] = std::move(x2);
  }
  return out;
}

double calibrate_max_f1(const Vec& losses, const std::vector<int>& labels) {
  if (losses.size() != labels.size() || losses.empty())
    throw std::invalid_argument("calibrate_max_f1: bad inputs");
  const int positives = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0 || positives == static_cast<int>(labels.size()))
    throw std::invalid_argument("calibrate_max_f1: labels must contain both classes");

  Vec uniq = losses;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  Vec candidates;
  candidates.push_back(uniq.front() - 1.0);  // everything untrusted
  for (std::size_t i = 0; i + 1 < uniq.size(); ++i) candidates.push_back(0.5 * (uniq[i] + uniq[i + 1]));
  candidates.push_back(uniq.back() + 1.0);   // everything trusted

  double best_thr = candidates.front();
  double best_f1 = -1.0;
  for (double thr : candidates) {
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < losses.size(); ++i) {
      const int predicted = classify_loss(losses[i], thr);
      if (predicted == 1 && labels[i] == 1) ++tp;
      else if (predicted == 1 && labels[i] == 0) ++fp;
      else if (predicted == 0 && labels[i] == 1) ++fn;
    }
    const double denom = 2.0 * tp + fp + fn;
    const double f1 = denom == 0.0 ? 0.0 : 2.0 * tp / denom;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_thr = thr;
    }
  }
  return best_thr;
}

double calibrate_benign_quantile(const Vec& benign_losses, double q) {
  if (benign_losses.empty()) throw std::invalid_argument("calibrate_benign_quantile: empty losses");
  return quantile(benign_losses, q);
}

int classify_sequence(const std::vector<int>& labels, SequenceRule rule) {
  if (labels.empty()) throw std::invalid_argument("classify_sequence: empty sequence");
  const int k = static_cast<int>(labels.size());
  const int sum = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
  if (rule == SequenceRule::All) return sum == k ? 1 : 0;
  return 2 * sum >= k + 1 ? 1 : 0;
}

namespace {

double window_mse(const std::vector<Vec>& reconstruction, const FeatureWindow& target) {
  return nn::mse(reconstruction, target.rows());
}

}  // namespace

MarrsPipeline MarrsPipeline::train(
    const std::map<std::string, std::vector<FeatureWindow>>& train_windows,
    const DetectionConfig& cfg, const Standardizer& scaler, std::uint64_t seed) {
  if (train_windows.size() < 2) throw std::invalid_argument("MarrsPipeline: need at least 2 cells");

  MarrsPipeline p;
  p.cfg_ = cfg;
  p.scaler_ = scaler;
  for (const auto& [cell, windows] : train_windows) {
    if (windows.empty()) throw std::invalid_argument("MarrsPipeline: cell with zero training windows: " + cell);
    p.cells_.push_back(cell);
  }

  nn::TrainConfig tc;
  tc.epochs = cfg.train.epochs;
  tc.batch = cfg.train.batch;
  tc.lr = cfg.train.lr;

  // stage one: a dedicated autoencoder per cell over its own windows
  std::uint64_t cell_index = 0;
  for (const auto& cell : p.cells_) {
    nn::Seq2SeqConfig sc;
    sc.input_dim = kFeatureCount;
    sc.latent_dim = cfg.latent_dim;
    sc.hidden_size = cfg.hidden_size;
    sc.output_dim = kFeatureCount;
    sc.output_len = cfg.window_len;
    nn::Seq2SeqAe ae(sc, derive_seed(seed, 0xae100ULL + cell_index));

    std::vector<nn::SeqSample> data;
    for (const auto& w : train_windows.at(cell)) {
      const auto rows = w.rows();
      data.push_back({rows, rows});
    }
    tc.seed = derive_seed(seed, 0xae1aaULL + cell_index);
    nn::train_seq2seq(ae, data, tc);
    p.ae1_.emplace(cell, std::move(ae));
    ++cell_index;
  }

  // windows are aligned by construction: same range, same stride
  const std::size_t n_windows = train_windows.begin()->second.size();
  for (const auto& [cell, windows] : train_windows) {
    if (windows.size() != n_windows)
      throw std::invalid_argument("MarrsPipeline: misaligned training windows for " + cell);
  }

  std::map<std::string, std::vector<nn::SeqSample>> ae2_data;
  for (std::size_t wi = 0; wi < n_windows; ++wi) {
    std::map<std::string, Vec> embs;
    for (const auto& cell : p.cells_) {
      embs[cell] = p.ae1_.at(cell).encode_const(train_windows.at(cell)[wi].rows());
    }
    auto x2 = build_x2(embs, p.cells_);
    for (const auto& cell : p.cells_) {
      ae2_data[cell].push_back({{x2.at(cell)}, train_windows.at(cell)[wi].rows()});
    }
  }

  cell_index = 0;
  for (const auto& cell : p.cells_) {
    nn::Seq2SeqConfig sc;
    sc.input_dim = 2 * cfg.latent_dim;
    sc.latent_dim = cfg.latent_dim;
    sc.hidden_size = cfg.hidden_size;
    sc.output_dim = kFeatureCount;
    sc.output_len = cfg.window_len;
    nn::Seq2SeqAe ae(sc, derive_seed(seed, 0xae200ULL + cell_index));
    tc.seed = derive_seed(seed, 0xae2aaULL + cell_index);
    nn::train_seq2seq(ae, ae2_data.at(cell), tc);
    p.ae2_.emplace(cell, std::move(ae));
    ++cell_index;
  }
  return p;
}

Vec MarrsPipeline::embed(const std::string& cell, const FeatureWindow& window) const {
  auto it = ae1_.find(cell);
  if (it == ae1_.end()) throw std::invalid_argument("MarrsPipeline: unmodeled cell " + cell);
  return it->second.encode_const(window.rows());
}

double MarrsPipeline::loss(const std::string& cell,
                           const std::map<std::string, FeatureWindow>& aligned) const {
  auto it = ae2_.find(cell);
  if (it == ae2_.end()) throw std::invalid_argument("MarrsPipeline: unmodeled cell " + cell);

  std::map<std::string, Vec> embs;
  for (const auto& c : cells_) {
    auto wit = aligned.find(c);
    if (wit == aligned.end()) throw std::invalid_argument("MarrsPipeline: missing window for " + c);
    embs[c] = embed(c, wit->second);
  }
  const auto x2 = build_x2(embs, cells_);
  const auto reconstruction = it->second.infer({x2.at(cell)}).output;
  return window_mse(reconstruction, aligned.at(cell));
}

double MarrsPipeline::loss_ae1(const std::string& cell, const FeatureWindow& window) const {
  auto it = ae1_.find(cell);
  if (it == ae1_.end()) throw std::invalid_argument("MarrsPipeline: unmodeled cell " + cell);
  const auto reconstruction = it->second.infer(window.rows()).output;
  return window_mse(reconstruction, window);
}

Verdict MarrsPipeline::classify(const std::string& cell,
                                const std::map<std::string, FeatureWindow>& aligned,
                                double threshold) const {
  Verdict v;
  v.loss = loss(cell, aligned);
  v.label = classify_loss(v.loss, threshold);
  return v;
}

std::uint64_t MarrsPipeline::fingerprint() const {
  std::string canon = feature_schema();
  canon += "|w" + std::to_string(cfg_.window_len);
  canon += "|l" + std::to_string(cfg_.latent_dim);
  canon += "|h" + std::to_string(cfg_.hidden_size);
  for (const auto& c : cells_) canon += "|" + c;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void MarrsPipeline::save(const std::string& path, double threshold,
                         const std::string& policy) const {
  io::Container c;
  c.put_str("schema", feature_schema());
  std::string cells_joined;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (i) cells_joined += ",";
    cells_joined += cells_[i];
  }
  c.put_str("cells", cells_joined);
  c.put_u64("window_len", cfg_.window_len);
  c.put_u64("latent_dim", cfg_.latent_dim);
  c.put_u64("hidden_size", cfg_.hidden_size);
  c.put_u64("fingerprint", fingerprint());
  c.put_f64("scaler.mean", {scaler_.means().size()}, scaler_.means());
  c.put_f64("scaler.std", {scaler_.stds().size()}, scaler_.stds());
  c.put_scalar("threshold", threshold);
  c.put_str("threshold_policy", policy);
  for (const auto& cell : cells_) {
    ae1_.at(cell).to_container(c, "ae1." + cell);
    ae2_.at(cell).to_container(c, "ae2." + cell);
  }
  c.save(path);
}

MarrsPipeline MarrsPipeline::load(const std::string& path, const DetectionConfig& expected_cfg,
                                  const std::vector<std::string>& expected_cells,
                                  double* threshold, std::string* policy) {
  const io::Container c = io::Container::load(path);
  if (c.get_str("schema") != feature_schema())
    throw io::ContainerError("marrs bundle: feature schema mismatch");
  if (c.get_u64("window_len") != expected_cfg.window_len ||
      c.get_u64("latent_dim") != expected_cfg.latent_dim ||
      c.get_u64("hidden_size") != expected_cfg.hidden_size)
    throw io::ContainerError("marrs bundle: model geometry mismatch");

  std::string cells_joined;
  for (std::size_t i = 0; i < expected_cells.size(); ++i) {
    if (i) cells_joined += ",";
    cells_joined += expected_cells[i];
  }
  if (c.get_str("cells") != cells_joined)
    throw io::ContainerError("marrs bundle: cell set mismatch");

  MarrsPipeline p;
  p.cfg_ = expected_cfg;
  p.cells_ = expected_cells;
  p.scaler_.set(c.get("scaler.mean").f64, c.get("scaler.std").f64);
  if (threshold) *threshold = c.get_scalar("threshold");
  if (policy) *policy = c.get_str("threshold_policy");
  for (const auto& cell : expected_cells) {
    p.ae1_.emplace(cell, nn::Seq2SeqAe::from_container(c, "ae1." + cell));
    p.ae2_.emplace(cell, nn::Seq2SeqAe::from_container(c, "ae2." + cell));
  }
  if (p.fingerprint() != c.get_u64("fingerprint"))
    throw io::ContainerError("marrs bundle: fingerprint mismatch");
  return p;
}

std::vector<Vec> Ae1PlusModel::enriched_rows(const std::string& cell,
                                             const std::map<std::string, FeatureWindow>& aligned) {
  auto it = aligned.find(cell);
  if (it == aligned.end()) throw std::invalid_argument("Ae1Plus: missing window for " + cell);
  const auto own = it->second.rows();
  const std::size_t others = aligned.size() - 1;
  if (others == 0) throw std::invalid_argument("Ae1Plus: need at least 2 cells");

  std::vector<Vec> out;
  out.reserve(own.size());
  for (std::size_t r = 0; r < own.size(); ++r) {
    Vec agg(kFeatureCount, 0.0);
    for (const auto& [other, w] : aligned) {
      if (other == cell) continue;
      axpy(agg, 1.0, w.values.row_vec(r));
    }
    for (auto& v : agg) v /= static_cast<double>(others);
    Vec row = own[r];
    row.insert(row.end(), agg.begin(), agg.end());
    out.push_back(std::move(row));
  }
  return out;
}

Ae1PlusModel Ae1PlusModel::train(
    const std::map<std::string, std::vector<FeatureWindow>>& train_windows,
    const DetectionConfig& cfg, std::uint64_t seed) {
  Ae1PlusModel model;
  const std::size_t n_windows = train_windows.begin()->second.size();
  std::vector<std::string> cells;
  for (const auto& [cell, windows] : train_windows) {
    if (windows.size() != n_windows) throw std::invalid_argument("Ae1Plus: misaligned windows");
    cells.push_back(cell);
  }

  nn::TrainConfig tc;
  tc.epochs = cfg.train.epochs;
  tc.batch = cfg.train.batch;
  tc.lr = cfg.train.lr;

  std::uint64_t cell_index = 0;
  for (const auto& cell : cells) {
    std::vector<nn::SeqSample> data;
    for (std::size_t wi = 0; wi < n_windows; ++wi) {
      std::map<std::string, FeatureWindow> aligned;
      for (const auto& c : cells) aligned[c] = train_windows.at(c)[wi];
      data.push_back({enriched_rows(cell, aligned), train_windows.at(cell)[wi].rows()});
    }
    nn::Seq2SeqConfig sc;
    sc.input_dim = 2 * kFeatureCount;
    sc.latent_dim = cfg.latent_dim;
    sc.hidden_size = cfg.hidden_size;
    sc.output_dim = kFeatureCount;
    sc.output_len = cfg.window_len;
    nn::Seq2SeqAe ae(sc, derive_seed(seed, 0xae1900ULL + cell_index));
    tc.seed = derive_seed(seed, 0xae19aaULL + cell_index);
    nn::train_seq2seq(ae, data, tc);
    model.models_.emplace(cell, std::move(ae));
    ++cell_index;
  }
  return model;
}

double Ae1PlusModel::loss(const std::string& cell,
                          const std::map<std::string, FeatureWindow>& aligned) const {
  auto it = models_.find(cell);
  if (it == models_.end()) throw std::invalid_argument("Ae1Plus: unmodeled cell " + cell);
  const auto reconstruction = it->second.infer(enriched_rows(cell, aligned)).output;
  return nn::mse(reconstruction, aligned.at(cell).rows());
}

}  // namespace steerlab::marrs
