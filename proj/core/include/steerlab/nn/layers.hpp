#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "steerlab/math/matrix.hpp"
#include "steerlab/math/rng.hpp"

namespace steerlab::nn {

enum class Activation : std::uint8_t { Identity = 0, Tanh = 1, Sigmoid = 2, Relu = 3 };

double activate(Activation act, double z);
double activate_grad(Activation act, double z, double y);

/// Flat view of one parameter tensor and its gradient buffer.
struct ParamView {
  double* value;
  double* grad;
  std::size_t size;
};
using ParamSet = std::vector<ParamView>;

/// Fully connected layer. Sequence-shaped forward/backward so the same layer
/// serves both per-step decoder heads and plain MLPs. Caches live on the
/// layer; one in-flight forward at a time.
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out, Activation act, Rng& rng);

  std::vector<Vec> forward_seq(const std::vector<Vec>& xs);
  std::vector<Vec> backward_seq(const std::vector<Vec>& dys);

  /// Cache-free forward pass for scoring against an immutable model.
  std::vector<Vec> infer_seq(const std::vector<Vec>& xs) const;

  void collect_params(ParamSet& out);
  void zero_grad();

  std::size_t in_size() const { return w.cols(); }
  std::size_t out_size() const { return w.rows(); }

  Matrix w, gw;   // out × in
  Matrix b, gb;   // 1 × out
  Activation act = Activation::Identity;

 private:
  std::vector<Vec> cache_x_, cache_z_, cache_y_;
};

/// Single LSTM layer unrolled over a sequence. Standard gates, forget-gate
/// bias initialized to 1.
class LstmLayer {
 public:
  LstmLayer() = default;
  LstmLayer(std::size_t input, std::size_t hidden, Rng& rng);

  /// Returns h_t for every step, starting from zero state.
  std::vector<Vec> forward(const std::vector<Vec>& xs);

  /// dhs[t] is the loss gradient w.r.t. h_t; returns gradients w.r.t. inputs.
  std::vector<Vec> backward(const std::vector<Vec>& dhs);

  /// Cache-free forward pass for scoring against an immutable model.
  std::vector<Vec> infer(const std::vector<Vec>& xs) const;

  void collect_params(ParamSet& out);
  void zero_grad();

  std::size_t input_size() const { return wi.cols(); }
  std::size_t hidden_size() const { return wi.rows(); }

  // Input weights (hidden × input), recurrent weights (hidden × hidden),
  // biases (1 × hidden), for gates i, f, o and the cell candidate g.
  Matrix wi, wf, wo, wg;
  Matrix ui, uf, uo, ug;
  Matrix bi, bf, bo, bg;
  Matrix gwi, gwf, gwo, gwg;
  Matrix gui, guf, guo, gug;
  Matrix gbi, gbf, gbo, gbg;

 private:
  struct StepCache {
    Vec x, i, f, o, g, c, h, tanh_c, h_prev, c_prev;
  };
  std::vector<StepCache> cache_;
};

}  // namespace steerlab::nn
