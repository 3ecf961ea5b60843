#pragma once

#include <vector>

#include "steerlab/io/container.hpp"
#include "steerlab/nn/layers.hpp"

namespace steerlab::nn {

double mse(const std::vector<Vec>& output, const std::vector<Vec>& target);

struct Seq2SeqConfig {
  std::size_t input_dim = 0;
  std::size_t latent_dim = 8;
  std::size_t hidden_size = 16;
  std::size_t output_dim = 0;
  std::size_t output_len = 0;
};

/// Sequence-to-sequence autoencoder: an LSTM encoder whose final hidden state
/// is the latent code, and an LSTM decoder fed the latent code at every step,
/// with a fully connected output head.
class Seq2SeqAe {
 public:
  Seq2SeqAe() = default;
  Seq2SeqAe(const Seq2SeqConfig& cfg, std::uint64_t seed);

  struct ForwardResult {
    std::vector<Vec> output;  // output_len × output_dim
    Vec latent;               // latent_dim
  };

  ForwardResult forward(const std::vector<Vec>& input_seq);

  /// Backpropagates MSE(last forward output, target) scaled by `scale`,
  /// accumulating into the gradient buffers. Returns the unscaled loss.
  double backward_mse(const std::vector<Vec>& target, double scale);

  Vec encode(const std::vector<Vec>& input_seq);

  /// Cache-free paths for scoring against an immutable model.
  ForwardResult infer(const std::vector<Vec>& input_seq) const;
  Vec encode_const(const std::vector<Vec>& input_seq) const;

  void collect_params(ParamSet& out);
  void zero_grad();
  const Seq2SeqConfig& config() const { return cfg_; }

  void to_container(io::Container& c, const std::string& prefix) const;
  static Seq2SeqAe from_container(const io::Container& c, const std::string& prefix);

 private:
  Seq2SeqConfig cfg_;
  LstmLayer encoder_;  // input_dim → latent_dim
  LstmLayer decoder_;  // latent_dim → hidden_size
  DenseLayer head_;    // hidden_size → output_dim
  ForwardResult last_;
  std::size_t last_input_len_ = 0;
};

}  // namespace steerlab::nn
