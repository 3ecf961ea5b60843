#include "steerlab/nn/seq2seq.hpp"

#include <stdexcept>

namespace steerlab::nn {

double mse(const std::vector<Vec>& output, const std::vector<Vec>& target) {
  if (output.size() != target.size()) throw std::invalid_argument("mse: sequence length mismatch");
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < output.size(); ++t) {
    if (output[t].size() != target[t].size()) throw std::invalid_argument("mse: width mismatch");
    for (std::size_t j = 0; j < output[t].size(); ++j) {
      const double d = output[t][j] - target[t][j];
      acc += d * d;
      ++n;
    }
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

Seq2SeqAe::Seq2SeqAe(const Seq2SeqConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  Rng rng(seed);
  encoder_ = LstmLayer(cfg.input_dim, cfg.latent_dim, rng);
  decoder_ = LstmLayer(cfg.latent_dim, cfg.hidden_size, rng);
  head_ = DenseLayer(cfg.hidden_size, cfg.output_dim, Activation::Identity, rng);
}

Seq2SeqAe::ForwardResult Seq2SeqAe::forward(const std::vector<Vec>& input_seq) {
  if (input_seq.empty()) throw std::invalid_argument("Seq2SeqAe: empty input sequence");
  for (const auto& x : input_seq) {
    if (x.size() != cfg_.input_dim) throw std::invalid_argument("Seq2SeqAe: input width mismatch");
  }
  const auto enc_states = encoder_.forward(input_seq);
  last_.latent = enc_states.back();
  last_input_len_ = input_seq.size();

  const std::vector<Vec> dec_inputs(cfg_.output_len, last_.latent);
  const auto dec_states = decoder_.forward(dec_inputs);
  last_.output = head_.forward_seq(dec_states);
  return last_;
}

double Seq2SeqAe::backward_mse(const std::vector<Vec>& target, double scale) {
  if (target.size() != cfg_.output_len) throw std::invalid_argument("Seq2SeqAe: target length mismatch");
  const double loss = mse(last_.output, target);

  const double denom = static_cast<double>(cfg_.output_len * cfg_.output_dim);
  std::vector<Vec> dys(cfg_.output_len, Vec(cfg_.output_dim, 0.0));
  for (std::size_t t = 0; t < cfg_.output_len; ++t) {
    for (std::size_t j = 0; j < cfg_.output_dim; ++j) {
      dys[t][j] = 2.0 * (last_.output[t][j] - target[t][j]) / denom * scale;
    }
  }

  const auto d_hidden = head_.backward_seq(dys);
  const auto d_dec_inputs = decoder_.backward(d_hidden);

  Vec d_latent(cfg_.latent_dim, 0.0);
  for (const auto& dx : d_dec_inputs) axpy(d_latent, 1.0, dx);

  std::vector<Vec> enc_dhs(last_input_len_, Vec(cfg_.latent_dim, 0.0));
  enc_dhs.back() = d_latent;
  encoder_.backward(enc_dhs);
  return loss;
}

Vec Seq2SeqAe::encode(const std::vector<Vec>& input_seq) {
  const auto states = encoder_.forward(input_seq);
  return states.back();
}

Seq2SeqAe::ForwardResult Seq2SeqAe::infer(const std::vector<Vec>& input_seq) const {
  if (input_seq.empty()) throw std::invalid_argument("Seq2SeqAe: empty input sequence");
  ForwardResult out;
  out.latent = encoder_.infer(input_seq).back();
  const std::vector<Vec> dec_inputs(cfg_.output_len, out.latent);
  out.output = head_.infer_seq(decoder_.infer(dec_inputs));
  return out;
}

Vec Seq2SeqAe::encode_const(const std::vector<Vec>& input_seq) const {
  return encoder_.infer(input_seq).back();
}

void Seq2SeqAe::collect_params(ParamSet& out) {
  encoder_.collect_params(out);
  decoder_.collect_params(out);
  head_.collect_params(out);
}

void Seq2SeqAe::zero_grad() {
  encoder_.zero_grad();
  decoder_.zero_grad();
  head_.zero_grad();
}

namespace {

void put_matrix(io::Container& c, const std::string& name, const Matrix& m) {
  c.put_f64(name, {m.rows(), m.cols()}, m.raw());
}

Matrix get_matrix(const io::Container& c, const std::string& name) {
  const auto& e = c.get(name);
  if (e.dims.size() != 2) throw io::ContainerError("expected 2-d tensor: " + name);
  Matrix m(static_cast<std::size_t>(e.dims[0]), static_cast<std::size_t>(e.dims[1]));
  m.raw() = e.f64;
  return m;
}

const char* kLstmNames[12] = {"wi", "wf", "wo", "wg", "ui", "uf", "uo", "ug",
                              "bi", "bf", "bo", "bg"};

void put_lstm(io::Container& c, const std::string& prefix, const LstmLayer& l) {
  const Matrix* ms[12] = {&l.wi, &l.wf, &l.wo, &l.wg, &l.ui, &l.uf, &l.uo, &l.ug,
                          &l.bi, &l.bf, &l.bo, &l.bg};
  for (int k = 0; k < 12; ++k) put_matrix(c, prefix + "." + kLstmNames[k], *ms[k]);
}

void get_lstm(const io::Container& c, const std::string& prefix, LstmLayer& l) {
  Matrix* ms[12] = {&l.wi, &l.wf, &l.wo, &l.wg, &l.ui, &l.uf, &l.uo, &l.ug,
                    &l.bi, &l.bf, &l.bo, &l.bg};
  for (int k = 0; k < 12; ++k) *ms[k] = get_matrix(c, prefix + "." + kLstmNames[k]);
}

}  // namespace

void Seq2SeqAe::to_container(io::Container& c, const std::string& prefix) const {
  c.put_i64(prefix + ".shape", {5},
            {static_cast<std::int64_t>(cfg_.input_dim), static_cast<std::int64_t>(cfg_.latent_dim),
             static_cast<std::int64_t>(cfg_.hidden_size), static_cast<std::int64_t>(cfg_.output_dim),
             static_cast<std::int64_t>(cfg_.output_len)});
  put_lstm(c, prefix + ".enc", encoder_);
  put_lstm(c, prefix + ".dec", decoder_);
  put_matrix(c, prefix + ".head.w", head_.w);
  put_matrix(c, prefix + ".head.b", head_.b);
}

Seq2SeqAe Seq2SeqAe::from_container(const io::Container& c, const std::string& prefix) {
  const auto& shape = c.get(prefix + ".shape");
  if (shape.i64.size() != 5) throw io::ContainerError("bad seq2seq shape table");
  Seq2SeqConfig cfg;
  cfg.input_dim = static_cast<std::size_t>(shape.i64[0]);
  cfg.latent_dim = static_cast<std::size_t>(shape.i64[1]);
  cfg.hidden_size = static_cast<std::size_t>(shape.i64[2]);
  cfg.output_dim = static_cast<std::size_t>(shape.i64[3]);
  cfg.output_len = static_cast<std::size_t>(shape.i64[4]);

  Seq2SeqAe ae(cfg, 0);
  get_lstm(c, prefix + ".enc", ae.encoder_);
  get_lstm(c, prefix + ".dec", ae.decoder_);
  ae.head_.w = get_matrix(c, prefix + ".head.w");
  ae.head_.b = get_matrix(c, prefix + ".head.b");
  ae.head_.gw = Matrix(ae.head_.w.rows(), ae.head_.w.cols());
  ae.head_.gb = Matrix(ae.head_.b.rows(), ae.head_.b.cols());
  return ae;
}

}  // namespace steerlab::nn
