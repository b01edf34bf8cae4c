#include "deeppolar/attention.hpp"

#include <cmath>

namespace dpp {

AttentionWeights AttentionWeights::zeros(int hidden, int heads, int head_dim, double dropout_rate) {
  const int width = heads * head_dim;
  return AttentionWeights{Matrix::Zero(hidden, width), Matrix::Zero(hidden, width), Matrix::Zero(hidden, width),
                          Matrix::Zero(width, hidden),  Matrix::Ones(1, hidden),     Matrix::Zero(1, hidden),
                          heads,                        dropout_rate};
}

AttentionWeights AttentionWeights::random(int hidden, int heads, int head_dim, Rng& rng, double dropout_rate) {
  AttentionWeights w = zeros(hidden, heads, head_dim, dropout_rate);
  const double s_in = 1.0 / std::sqrt(static_cast<double>(hidden));
  const double s_out = 1.0 / std::sqrt(static_cast<double>(heads * head_dim));
  w.wq = gaussian_matrix(rng, hidden, heads * head_dim, s_in);
  w.wk = gaussian_matrix(rng, hidden, heads * head_dim, s_in);
  w.wv = gaussian_matrix(rng, hidden, heads * head_dim, s_in);
  w.wo = gaussian_matrix(rng, heads * head_dim, hidden, s_out);
  return w;
}

Matrix attention_weights(const Matrix& q, const Matrix& k) {
  if (q.rows() == 0) throw DomainError("attention over an empty sequence");
  if (q.rows() != k.rows() || q.cols() != k.cols()) throw ConfigError("attention: Q and K shapes differ");
  return ad::softmax_rows((q * k.transpose()) / std::sqrt(static_cast<double>(q.cols())));
}

Matrix scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
  if (v.rows() != k.rows()) throw ConfigError("attention: V length differs from K");
  return attention_weights(q, k) * v;
}

Matrix multi_head_attention(const Matrix& x, const AttentionWeights& w) {
  if (x.rows() == 0) throw DomainError("attention over an empty sequence");
  ad::Tape tape(false);
  return ad::multi_head_self_attention(tape.constant(x), x.rows(), tape.constant(w.wq), tape.constant(w.wk),
                                       tape.constant(w.wv), tape.constant(w.wo), w.heads)
      .value();
}

Matrix sa_block(const Matrix& x, const AttentionWeights& w, bool training, std::uint64_t dropout_seed) {
  if (x.rows() == 0) throw DomainError("attention over an empty sequence");
  ad::Tape tape(false, dropout_seed);
  const ad::Var xv = tape.constant(x);
  const ad::Var att = ad::multi_head_self_attention(xv, x.rows(), tape.constant(w.wq), tape.constant(w.wk),
                                                    tape.constant(w.wv), tape.constant(w.wo), w.heads);
  return ad::layer_norm(ad::add(xv, ad::dropout(att, w.dropout_rate, training)), tape.constant(w.ln_gain),
                        tape.constant(w.ln_bias))
      .value();
}

// ---- AttentionPositionNet -------------------------------------------------------

AttentionPositionNet::AttentionPositionNet(int inputs, const ModelConfig& model, Rng& rng)
    : inputs_(inputs),
      hidden_(model.dec_hidden),
      layers_(model.dec_layers),
      heads_(model.heads),
      dropout_(model.dropout) {
  const int h = hidden_;
  // Each token is one scalar times its own column, so fan-in is 1.
  theta1_ = params_.add("theta1", gaussian_matrix(rng, h, inputs, 1.0));
  pos_bias_ = params_.add("pos_bias", gaussian_matrix(rng, inputs, h, 0.1));
  const AttentionWeights att = AttentionWeights::random(h, model.heads, model.head_dim, rng, model.dropout);
  wq_ = params_.add("wq", att.wq);
  wk_ = params_.add("wk", att.wk);
  wv_ = params_.add("wv", att.wv);
  wo_ = params_.add("wo", att.wo);
  ln_gain_ = params_.add("ln_gain", Matrix::Ones(1, h));
  ln_bias_ = params_.add("ln_bias", Matrix::Zero(1, h));
  ff_begin_ = params_.size();
  for (int l = 1; l < layers_; ++l) {
    params_.add("theta" + std::to_string(l + 1), gaussian_matrix(rng, h, h, 1.0 / std::sqrt(static_cast<double>(h))));
    params_.add("bias" + std::to_string(l + 1), Matrix::Zero(1, h));
  }
  params_.add("theta_out", gaussian_matrix(rng, 1, h, 1.0 / std::sqrt(static_cast<double>(h))));
  params_.add("bias_out", Matrix::Zero(1, 1));
}

ad::Var AttentionPositionNet::embed(ad::Tape& tape, ad::Var input) const {
  if (input.cols() != inputs_)
    throw ConfigError("attention position network expects " + std::to_string(inputs_) + " inputs, got " +
                      std::to_string(input.cols()));
  return ad::selu(ad::token_embed(input, tape.param(params_[theta1_]), tape.param(params_[pos_bias_])));
}

ad::Var AttentionPositionNet::head(ad::Tape& tape, ad::Var pooled) const {
  ad::Var h = ad::selu(pooled);
  std::size_t idx = ff_begin_;
  for (int l = 1; l < layers_; ++l, idx += 2) h = ad::selu(ad::linear(h, tape.param(params_[idx]), tape.param(params_[idx + 1])));
  return ad::linear(h, tape.param(params_[idx]), tape.param(params_[idx + 1]));
}

ad::Var AttentionPositionNet::forward(ad::Tape& tape, ad::Var input, bool training) const {
  const ad::Var tokens = embed(tape, input);
  const ad::Var att = ad::multi_head_self_attention(tokens, inputs_, tape.param(params_[wq_]), tape.param(params_[wk_]),
                                                    tape.param(params_[wv_]), tape.param(params_[wo_]), heads_);
  const ad::Var sa = ad::layer_norm(ad::add(tokens, ad::dropout(att, dropout_, training)),
                                    tape.param(params_[ln_gain_]), tape.param(params_[ln_bias_]));
  return head(tape, ad::mean_pool(sa, inputs_));
}

ad::Var AttentionPositionNet::forward_without_attention(ad::Tape& tape, ad::Var input) const {
  const ad::Var tokens = embed(tape, input);
  const ad::Var sa = ad::layer_norm(tokens, tape.param(params_[ln_gain_]), tape.param(params_[ln_bias_]));
  return head(tape, ad::mean_pool(sa, inputs_));
}

AttentionWeights AttentionPositionNet::attention() const {
  return AttentionWeights{params_[wq_].value,      params_[wk_].value,      params_[wv_].value, params_[wo_].value,
                          params_[ln_gain_].value, params_[ln_bias_].value, heads_,             dropout_};
}

void AttentionPositionNet::set_attention(const AttentionWeights& w) {
  auto assign = [&](std::size_t idx, const Matrix& m) {
    if (m.rows() != params_[idx].value.rows() || m.cols() != params_[idx].value.cols())
      throw ConfigError("attention weight shape mismatch for " + params_[idx].name);
    params_[idx].value = m;
  };
  assign(wq_, w.wq);
  assign(wk_, w.wk);
  assign(wv_, w.wv);
  assign(wo_, w.wo);
  assign(ln_gain_, w.ln_gain);
  assign(ln_bias_, w.ln_bias);
}

double plus_decoder_forward(std::span<const double> llr, std::span<const std::uint8_t> decoded_prefix,
                            const AttentionPositionNet& net, bool training, std::uint64_t dropout_seed) {
  const auto width = static_cast<Eigen::Index>(llr.size() + decoded_prefix.size());
  if (width != net.inputs())
    throw ConfigError("plus decoder position expects " + std::to_string(net.inputs()) + " inputs, got " +
                      std::to_string(width));
  Matrix x(1, width);
  Eigen::Index c = 0;
  for (double v : llr) x(0, c++) = v;
  for (std::uint8_t b : decoded_prefix) x(0, c++) = b ? -1.0 : 1.0;
  ad::Tape tape(false, dropout_seed);
  return net.forward(tape, tape.constant(x), training).value()(0, 0);
}

}  // namespace dpp
