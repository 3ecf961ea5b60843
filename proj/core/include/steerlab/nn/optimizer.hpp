#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "steerlab/nn/layers.hpp"
#include "steerlab/nn/seq2seq.hpp"

namespace steerlab::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moment buffers are laid out against the
/// ParamSet passed to the first step; the set must stay stable afterwards.
class Adam {
 public:
  explicit Adam(const AdamConfig& cfg = {}) : cfg_(cfg) {}

  void step(const ParamSet& params);

  std::int64_t steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<Vec> m_, v_;
  std::int64_t t_ = 0;
};

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch = 32;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  double divergence_limit = 1e6;
};

struct TrainResult {
  Vec loss_history;  // one entry per epoch
};

struct TrainError : std::runtime_error {
  TrainError(const std::string& msg, Vec history)
      : std::runtime_error(msg), loss_history(std::move(history)) {}
  Vec loss_history;
};

/// One sample: input sequence and target sequence.
struct SeqSample {
  std::vector<Vec> input;
  std::vector<Vec> target;
};

TrainResult train_seq2seq(Seq2SeqAe& model, const std::vector<SeqSample>& data,
                          const TrainConfig& cfg);

/// Plain feed-forward network; hidden layers share one activation, the output
/// layer is linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<std::size_t>& dims, Activation hidden_act, std::uint64_t seed);

  Vec forward(const Vec& x);
  void backward(const Vec& dy);
  Vec infer(const Vec& x) const;
  double predict1(const Vec& x) const { return infer(x)[0]; }

  void collect_params(ParamSet& out);
  void zero_grad();

  void to_container(io::Container& c, const std::string& prefix) const;
  static Mlp from_container(const io::Container& c, const std::string& prefix);

 private:
  std::vector<DenseLayer> layers_;
};

TrainResult train_mlp(Mlp& model, const std::vector<Vec>& xs, const std::vector<Vec>& ys,
                      const TrainConfig& cfg);

}  // namespace steerlab::nn
