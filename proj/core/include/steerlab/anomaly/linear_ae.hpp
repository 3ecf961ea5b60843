#pragma once

#include <cstdint>
#include <vector>

#include "steerlab/io/container.hpp"
#include "steerlab/math/matrix.hpp"
#include "steerlab/nn/optimizer.hpp"

namespace steerlab::anomaly {

struct LinearAeParams {
  std::size_t latent_dim = 4;
  std::size_t epochs = 200;
  std::size_t batch = 32;
  double lr = 1e-2;
};

/// Linear-layer autoencoder scored by reconstruction MSE.
struct LinearAutoencoder {
  nn::Mlp net;  // in → latent → in, identity activations
  std::size_t input_dim = 0;
  std::size_t latent_dim = 0;

  Vec reconstruct(const Vec& x) const;

  void to_container(io::Container& c, const std::string& prefix) const;
  static LinearAutoencoder from_container(const io::Container& c, const std::string& prefix);
};

LinearAutoencoder linear_ae_fit(const std::vector<Vec>& data, const LinearAeParams& params,
                                std::uint64_t seed, Vec* loss_history = nullptr);

/// Reconstruction MSE of a single sample.
double linear_ae_loss(const LinearAutoencoder& model, const Vec& x);

}  // namespace steerlab::anomaly
