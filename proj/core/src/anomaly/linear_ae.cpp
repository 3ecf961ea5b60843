#include "steerlab/anomaly/linear_ae.hpp"

#include <stdexcept>

namespace steerlab::anomaly {

Vec LinearAutoencoder::reconstruct(const Vec& x) const { return net.infer(x); }

LinearAutoencoder linear_ae_fit(const std::vector<Vec>& data, const LinearAeParams& params,
                                std::uint64_t seed, Vec* loss_history) {
  if (data.empty()) throw std::invalid_argument("linear_ae_fit: empty training data");
  const std::size_t d = data.front().size();

  LinearAutoencoder model;
  model.input_dim = d;
  model.latent_dim = params.latent_dim;
  model.net = nn::Mlp({d, params.latent_dim, d}, nn::Activation::Identity, derive_seed(seed, 0x6c6165ULL));

  nn::TrainConfig cfg;
  cfg.epochs = params.epochs;
  cfg.batch = params.batch;
  cfg.lr = params.lr;
  cfg.seed = derive_seed(seed, 0x6c616554ULL);
  const auto result = nn::train_mlp(model.net, data, data, cfg);
  if (loss_history) *loss_history = result.loss_history;
  return model;
}

double linear_ae_loss(const LinearAutoencoder& model, const Vec& x) {
  if (x.size() != model.input_dim) throw std::invalid_argument("linear_ae_loss: bad feature width");
  const Vec y = model.reconstruct(x);
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double dd = y[j] - x[j];
    acc += dd * dd;
  }
  return acc / static_cast<double>(x.size());
}

void LinearAutoencoder::to_container(io::Container& c, const std::string& prefix) const {
  c.put_u64(prefix + ".input_dim", input_dim);
  c.put_u64(prefix + ".latent_dim", latent_dim);
  net.to_container(c, prefix + ".net");
}

LinearAutoencoder LinearAutoencoder::from_container(const io::Container& c,
                                                    const std::string& prefix) {
  LinearAutoencoder m;
  m.input_dim = static_cast<std::size_t>(c.get_u64(prefix + ".input_dim"));
  m.latent_dim = static_cast<std::size_t>(c.get_u64(prefix + ".latent_dim"));
  m.net = nn::Mlp::from_container(c, prefix + ".net");
  return m;
}

}  // namespace steerlab::anomaly
