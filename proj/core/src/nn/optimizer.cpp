#include "steerlab/nn/optimizer.hpp"

#include <cmath>
#include <numeric>

namespace steerlab::nn {

void Adam::step(const ParamSet& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size, 0.0);
      v_.emplace_back(p.size, 0.0);
    }
  }
  if (m_.size() != params.size()) throw std::logic_error("Adam: parameter set changed between steps");

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));

  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& p = params[k];
    if (m_[k].size() != p.size) throw std::logic_error("Adam: parameter shape changed");
    for (std::size_t i = 0; i < p.size; ++i) {
      const double g = p.grad[i];
      m_[k][i] = cfg_.beta1 * m_[k][i] + (1.0 - cfg_.beta1) * g;
      v_[k][i] = cfg_.beta2 * v_[k][i] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m_[k][i] / bc1;
      const double v_hat = v_[k][i] / bc2;
      p.value[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

namespace {

bool grads_finite(const ParamSet& params) {
  for (const auto& p : params) {
    for (std::size_t i = 0; i < p.size; ++i) {
      if (!std::isfinite(p.grad[i])) return false;
    }
  }
  return true;
}

void zero_grads(const ParamSet& params) {
  for (const auto& p : params) {
    for (std::size_t i = 0; i < p.size; ++i) p.grad[i] = 0.0;
  }
}

}  // namespace

TrainResult train_seq2seq(Seq2SeqAe& model, const std::vector<SeqSample>& data,
                          const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("train_seq2seq: empty dataset");

  ParamSet params;
  model.collect_params(params);
  Adam adam(AdamConfig{.lr = cfg.lr});
  Rng rng(derive_seed(cfg.seed, 0x7261694eULL));

  TrainResult result;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(start + cfg.batch, order.size());
      const double scale = 1.0 / static_cast<double>(end - start);
      zero_grads(params);
      for (std::size_t k = start; k < end; ++k) {
        const auto& sample = data[order[k]];
        model.forward(sample.input);
        epoch_loss += model.backward_mse(sample.target, scale);
      }
      if (!grads_finite(params)) {
        throw TrainError("train_seq2seq: non-finite gradient at epoch " + std::to_string(epoch),
                         result.loss_history);
      }
      adam.step(params);
    }

    epoch_loss /= static_cast<double>(data.size());
    result.loss_history.push_back(epoch_loss);
    if (!(epoch_loss < cfg.divergence_limit)) {
      throw TrainError("train_seq2seq: diverged (loss " + std::to_string(epoch_loss) + ")",
                       result.loss_history);
    }
  }
  return result;
}

Mlp::Mlp(const std::vector<std::size_t>& dims, Activation hidden_act, std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
  Rng rng(seed);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const bool last = (k + 2 == dims.size());
    layers_.emplace_back(dims[k], dims[k + 1], last ? Activation::Identity : hidden_act, rng);
  }
}

Vec Mlp::forward(const Vec& x) {
  std::vector<Vec> cur{x};
  for (auto& layer : layers_) cur = layer.forward_seq(cur);
  return cur.front();
}

void Mlp::backward(const Vec& dy) {
  std::vector<Vec> cur{dy};
  for (std::size_t k = layers_.size(); k-- > 0;) cur = layers_[k].backward_seq(cur);
}

Vec Mlp::infer(const Vec& x) const {
  std::vector<Vec> cur{x};
  for (const auto& layer : layers_) cur = layer.infer_seq(cur);
  return cur.front();
}

void Mlp::collect_params(ParamSet& out) {
  for (auto& layer : layers_) layer.collect_params(out);
}

void Mlp::zero_grad() {
  for (auto& layer : layers_) layer.zero_grad();
}

void Mlp::to_container(io::Container& c, const std::string& prefix) const {
  c.put_u64(prefix + ".layers", layers_.size());
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    const std::string base = prefix + ".l" + std::to_string(k);
    c.put_f64(base + ".w", {l.w.rows(), l.w.cols()}, l.w.raw());
    c.put_f64(base + ".b", {l.b.rows(), l.b.cols()}, l.b.raw());
    c.put_u64(base + ".act", static_cast<std::uint64_t>(l.act));
  }
}

Mlp Mlp::from_container(const io::Container& c, const std::string& prefix) {
  Mlp m;
  const auto n = c.get_u64(prefix + ".layers");
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::string base = prefix + ".l" + std::to_string(k);
    const auto& we = c.get(base + ".w");
    const auto& be = c.get(base + ".b");
    DenseLayer l;
    l.w = Matrix(static_cast<std::size_t>(we.dims[0]), static_cast<std::size_t>(we.dims[1]));
    l.w.raw() = we.f64;
    l.b = Matrix(static_cast<std::size_t>(be.dims[0]), static_cast<std::size_t>(be.dims[1]));
    l.b.raw() = be.f64;
    l.gw = Matrix(l.w.rows(), l.w.cols());
    l.gb = Matrix(l.b.rows(), l.b.cols());
    l.act = static_cast<Activation>(c.get_u64(base + ".act"));
    m.layers_.push_back(std::move(l));
  }
  return m;
}

TrainResult train_mlp(Mlp& model, const std::vector<Vec>& xs, const std::vector<Vec>& ys,
                      const TrainConfig& cfg) {
  if (xs.empty() || xs.size() != ys.size()) throw std::invalid_argument("train_mlp: bad dataset");

  ParamSet params;
  model.collect_params(params);
  Adam adam(AdamConfig{.lr = cfg.lr});
  Rng rng(derive_seed(cfg.seed, 0x6d6c7054ULL));

  TrainResult result;
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(start + cfg.batch, order.size());
      const double scale = 1.0 / static_cast<double>(end - start);
      zero_grads(params);
      for (std::size_t k = start; k < end; ++k) {
        const auto& x = xs[order[k]];
        const auto& y = ys[order[k]];
        const Vec out = model.forward(x);
        double sample_loss = 0.0;
        Vec dy(out.size());
        for (std::size_t j = 0; j < out.size(); ++j) {
          const double d = out[j] - y[j];
          sample_loss += d * d;
          dy[j] = 2.0 * d / static_cast<double>(out.size()) * scale;
        }
        epoch_loss += sample_loss / static_cast<double>(out.size());
        model.backward(dy);
      }
      if (!grads_finite(params)) {
        throw TrainError("train_mlp: non-finite gradient at epoch " + std::to_string(epoch),
                         result.loss_history);
      }
      adam.step(params);
    }

    epoch_loss /= static_cast<double>(xs.size());
    result.loss_history.push_back(epoch_loss);
    if (!(epoch_loss < cfg.divergence_limit)) {
      throw TrainError("train_mlp: diverged (loss " + std::to_string(epoch_loss) + ")",
                       result.loss_history);
    }
  }
  return result;
}

}  // namespace steerlab::nn
