#include "steerlab/nn/layers.hpp"

#include <cmath>

namespace steerlab::nn {

double activate(Activation act, double z) {
  switch (act) {
    case Activation::Identity: return z;
    case Activation::Tanh: return std::tanh(z);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Relu: return z > 0.0 ? z : 0.0;
  }
  return z;
}

double activate_grad(Activation act, double z, double y) {
  switch (act) {
    case Activation::Identity: return 1.0;
    case Activation::Tanh: return 1.0 - y * y;
    case Activation::Sigmoid: return y * (1.0 - y);
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation activation, Rng& rng)
    : w(Matrix::xavier(out, in, rng)),
      gw(out, in),
      b(1, out),
      gb(1, out),
      act(activation) {}

std::vector<Vec> DenseLayer::forward_seq(const std::vector<Vec>& xs) {
  cache_x_ = xs;
  cache_z_.clear();
  cache_y_.clear();
  std::vector<Vec> ys;
  ys.reserve(xs.size());
  for (const auto& x : xs) {
    if (x.size() != in_size()) throw std::invalid_argument("DenseLayer: input width mismatch");
    Vec z = matvec(w, x);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += b(0, j);
    Vec y(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) y[j] = activate(act, z[j]);
    cache_z_.push_back(z);
    cache_y_.push_back(y);
    ys.push_back(std::move(y));
  }
  return ys;
}

std::vector<Vec> DenseLayer::backward_seq(const std::vector<Vec>& dys) {
  if (dys.size() != cache_x_.size()) throw std::logic_error("DenseLayer: backward without matching forward");
  std::vector<Vec> dxs;
  dxs.reserve(dys.size());
  for (std::size_t t = 0; t < dys.size(); ++t) {
    Vec dz(out_size());
    for (std::size_t j = 0; j < dz.size(); ++j) {
      dz[j] = dys[t][j] * activate_grad(act, cache_z_[t][j], cache_y_[t][j]);
      gb(0, j) += dz[j];
    }
    outer_acc(gw, dz, cache_x_[t]);
    dxs.push_back(matvec_t(w, dz));
  }
  return dxs;
}

std::vector<Vec> DenseLayer::infer_seq(const std::vector<Vec>& xs) const {
  std::vector<Vec> ys;
  ys.reserve(xs.size());
  for (const auto& x : xs) {
    if (x.size() != in_size()) throw std::invalid_argument("DenseLayer: input width mismatch");
    Vec y = matvec(w, x);
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = activate(act, y[j] + b(0, j));
    ys.push_back(std::move(y));
  }
  return ys;
}

void DenseLayer::collect_params(ParamSet& out) {
  out.push_back({w.data(), gw.data(), w.size()});
  out.push_back({b.data(), gb.data(), b.size()});
}

void DenseLayer::zero_grad() {
  gw.zero();
  gb.zero();
}

LstmLayer::LstmLayer(std::size_t input, std::size_t hidden, Rng& rng)
    : wi(Matrix::xavier(hidden, input, rng)),
      wf(Matrix::xavier(hidden, input, rng)),
      wo(Matrix::xavier(hidden, input, rng)),
      wg(Matrix::xavier(hidden, input, rng)),
      ui(Matrix::xavier(hidden, hidden, rng)),
      uf(Matrix::xavier(hidden, hidden, rng)),
      uo(Matrix::xavier(hidden, hidden, rng)),
      ug(Matrix::xavier(hidden, hidden, rng)),
      bi(1, hidden),
      bf(1, hidden, 1.0),
      bo(1, hidden),
      bg(1, hidden),
      gwi(hidden, input),
      gwf(hidden, input),
      gwo(hidden, input),
      gwg(hidden, input),
      gui(hidden, hidden),
      guf(hidden, hidden),
      guo(hidden, hidden),
      gug(hidden, hidden),
      gbi(1, hidden),
      gbf(1, hidden),
      gbo(1, hidden),
      gbg(1, hidden) {}

std::vector<Vec> LstmLayer::forward(const std::vector<Vec>& xs) {
  const std::size_t h_dim = hidden_size();
  cache_.clear();
  cache_.reserve(xs.size());

  Vec h(h_dim, 0.0), c(h_dim, 0.0);
  std::vector<Vec> outputs;
  outputs.reserve(xs.size());

  for (const auto& x : xs) {
    if (x.size() != input_size()) throw std::invalid_argument("LstmLayer: input width mismatch");
    StepCache sc;
    sc.x = x;
    sc.h_prev = h;
    sc.c_prev = c;

    Vec zi = matvec(wi, x), zf = matvec(wf, x), zo = matvec(wo, x), zg = matvec(wg, x);
    axpy(zi, 1.0, matvec(ui, h));
    axpy(zf, 1.0, matvec(uf, h));
    axpy(zo, 1.0, matvec(uo, h));
    axpy(zg, 1.0, matvec(ug, h));

    sc.i.resize(h_dim);
    sc.f.resize(h_dim);
    sc.o.resize(h_dim);
    sc.g.resize(h_dim);
    sc.c.resize(h_dim);
    sc.h.resize(h_dim);
    sc.tanh_c.resize(h_dim);
    for (std::size_t j = 0; j < h_dim; ++j) {
      sc.i[j] = activate(Activation::Sigmoid, zi[j] + bi(0, j));
      sc.f[j] = activate(Activation::Sigmoid, zf[j] + bf(0, j));
      sc.o[j] = activate(Activation::Sigmoid, zo[j] + bo(0, j));
      sc.g[j] = activate(Activation::Tanh, zg[j] + bg(0, j));
      sc.c[j] = sc.f[j] * c[j] + sc.i[j] * sc.g[j];
      sc.tanh_c[j] = std::tanh(sc.c[j]);
      sc.h[j] = sc.o[j] * sc.tanh_c[j];
    }
    h = sc.h;
    c = sc.c;
    outputs.push_back(h);
    cache_.push_back(std::move(sc));
  }
  return outputs;
}

std::vector<Vec> LstmLayer::backward(const std::vector<Vec>& dhs) {
  if (dhs.size() != cache_.size()) throw std::logic_error("LstmLayer: backward without matching forward");
  const std::size_t h_dim = hidden_size();
  const std::size_t steps = cache_.size();

  std::vector<Vec> dxs(steps);
  Vec dh_next(h_dim, 0.0), dc_next(h_dim, 0.0);

  for (std::size_t t = steps; t-- > 0;) {
    const StepCache& sc = cache_[t];
    Vec dh = dhs[t];
    axpy(dh, 1.0, dh_next);

    Vec dzi(h_dim), dzf(h_dim), dzo(h_dim), dzg(h_dim), dc(h_dim);
    for (std::size_t j = 0; j < h_dim; ++j) {
      dc[j] = dc_next[j] + dh[j] * sc.o[j] * (1.0 - sc.tanh_c[j] * sc.tanh_c[j]);
      const double d_o = dh[j] * sc.tanh_c[j];
      const double d_i = dc[j] * sc.g[j];
      const double d_g = dc[j] * sc.i[j];
      const double d_f = dc[j] * sc.c_prev[j];
      dzo[j] = d_o * sc.o[j] * (1.0 - sc.o[j]);
      dzi[j] = d_i * sc.i[j] * (1.0 - sc.i[j]);
      dzg[j] = d_g * (1.0 - sc.g[j] * sc.g[j]);
      dzf[j] = d_f * sc.f[j] * (1.0 - sc.f[j]);
      gbi(0, j) += dzi[j];
      gbf(0, j) += dzf[j];
      gbo(0, j) += dzo[j];
      gbg(0, j) += dzg[j];
    }

    outer_acc(gwi, dzi, sc.x);
    outer_acc(gwf, dzf, sc.x);
    outer_acc(gwo, dzo, sc.x);
    outer_acc(gwg, dzg, sc.x);
    outer_acc(gui, dzi, sc.h_prev);
    outer_acc(guf, dzf, sc.h_prev);
    outer_acc(guo, dzo, sc.h_prev);
    outer_acc(gug, dzg, sc.h_prev);

    Vec dx = matvec_t(wi, dzi);
    axpy(dx, 1.0, matvec_t(wf, dzf));
    axpy(dx, 1.0, matvec_t(wo, dzo));
    axpy(dx, 1.0, matvec_t(wg, dzg));
    dxs[t] = std::move(dx);

    dh_next = matvec_t(ui, dzi);
    axpy(dh_next, 1.0, matvec_t(uf, dzf));
    axpy(dh_next, 1.0, matvec_t(uo, dzo));
    axpy(dh_next, 1.0, matvec_t(ug, dzg));

    for (std::size_t j = 0; j < h_dim; ++j) dc_next[j] = dc[j] * sc.f[j];
  }
  return dxs;
}

std::vector<Vec> LstmLayer::infer(const std::vector<Vec>& xs) const {
  const std::size_t h_dim = hidden_size();
  Vec h(h_dim, 0.0), c(h_dim, 0.0);
  std::vector<Vec> outputs;
  outputs.reserve(xs.size());
  for (const auto& x : xs) {
    if (x.size() != input_size()) throw std::invalid_argument("LstmLayer: input width mismatch");
    Vec zi = matvec(wi, x), zf = matvec(wf, x), zo = matvec(wo, x), zg = matvec(wg, x);
    axpy(zi, 1.0, matvec(ui, h));
    axpy(zf, 1.0, matvec(uf, h));
    axpy(zo, 1.0, matvec(uo, h));
    axpy(zg, 1.0, matvec(ug, h));
    for (std::size_t j = 0; j < h_dim; ++j) {
      const double i_g = activate(Activation::Sigmoid, zi[j] + bi(0, j));
      const double f_g = activate(Activation::Sigmoid, zf[j] + bf(0, j));
      const double o_g = activate(Activation::Sigmoid, zo[j] + bo(0, j));
      const double g_g = activate(Activation::Tanh, zg[j] + bg(0, j));
      c[j] = f_g * c[j] + i_g * g_g;
      h[j] = o_g * std::tanh(c[j]);
    }
    outputs.push_back(h);
  }
  return outputs;
}

void LstmLayer::collect_params(ParamSet& out) {
  for (auto* m : {&wi, &wf, &wo, &wg, &ui, &uf, &uo, &ug, &bi, &bf, &bo, &bg}) {
    Matrix* g = nullptr;
    if (m == &wi) g = &gwi;
    else if (m == &wf) g = &gwf;
    else if (m == &wo) g = &gwo;
    else if (m == &wg) g = &gwg;
    else if (m == &ui) g = &gui;
    else if (m == &uf) g = &guf;
    else if (m == &uo) g = &guo;
    else if (m == &ug) g = &gug;
    else if (m == &bi) g = &gbi;
    else if (m == &bf) g = &gbf;
    else if (m == &bo) g = &gbo;
    else g = &gbg;
    out.push_back({m->data(), g->data(), m->size()});
  }
}

void LstmLayer::zero_grad() {
  for (auto* g : {&gwi, &gwf, &gwo, &gwg, &gui, &guf, &guo, &gug, &gbi, &gbf, &gbo, &gbg}) g->zero();
}

}  // namespace steerlab::nn
