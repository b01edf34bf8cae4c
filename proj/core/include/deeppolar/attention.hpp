#pragma once

#include <span>

#include "deeppolar/neural_coder.hpp"

namespace dpp {

/// Weights of one self-attention block: per-head projections are column
/// slices of wq/wk/wv (h x heads*d_k); wo is (heads*d_k) x h.
struct AttentionWeights {
  Matrix wq, wk, wv, wo;
  Matrix ln_gain, ln_bias;  // 1 x h
  int heads = 4;
  double dropout_rate = 0.1;

  int hidden() const { return static_cast<int>(wq.rows()); }
  int head_dim() const { return heads > 0 ? static_cast<int>(wq.cols()) / heads : 0; }
  /// Zero projections, unit gain, zero bias.
  static AttentionWeights zeros(int hidden, int heads, int head_dim, double dropout_rate = 0.1);
  static AttentionWeights random(int hidden, int heads, int head_dim, Rng& rng, double dropout_rate = 0.1);
};

/// softmax(Q K^T / sqrt(d_k)) V for Q, K, V of shape T x d_k.
Matrix scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v);
/// The row-stochastic weight matrix softmax(Q K^T / sqrt(d_k)).
Matrix attention_weights(const Matrix& q, const Matrix& k);
/// [head_1; ...; head_H] Psi^O for one sequence X (T x h).
Matrix multi_head_attention(const Matrix& x, const AttentionWeights& w);
/// LayerNorm(X + Dropout(MultiHead(X, X, X))). Dropout masks are drawn from dropout_seed.
Matrix sa_block(const Matrix& x, const AttentionWeights& w, bool training, std::uint64_t dropout_seed = 0);

/// Attention-enhanced position network: each of the ell + j scalar inputs
/// becomes a token x_t * theta1[:, t] + pos_bias[t]; tokens pass through
/// SELU, the self-attention block, a token mean, then the SELU feed-forward
/// stack down to one logit.
class AttentionPositionNet final : public PositionNet {
 public:
  AttentionPositionNet(int inputs, const ModelConfig& model, Rng& rng);

  ad::Var forward(ad::Tape& tape, ad::Var input, bool training) const override;
  std::unique_ptr<PositionNet> clone() const override { return std::make_unique<AttentionPositionNet>(*this); }
  int inputs() const override { return inputs_; }
  ad::ParamStore& params() override { return params_; }
  const ad::ParamStore& params() const override { return params_; }

  /// Forward with the attention block replaced by the identity map (ablation).
  ad::Var forward_without_attention(ad::Tape& tape, ad::Var input) const;

  AttentionWeights attention() const;
  void set_attention(const AttentionWeights& w);

 private:
  ad::Var embed(ad::Tape& tape, ad::Var input) const;
  ad::Var head(ad::Tape& tape, ad::Var pooled) const;

  int inputs_;
  int hidden_;
  int layers_;
  int heads_;
  double dropout_;
  std::size_t theta1_, pos_bias_, wq_, wk_, wv_, wo_, ln_gain_, ln_bias_, ff_begin_;
  ad::ParamStore params_;
};

/// One logit from a single input vector: llr (ell) and the prefix of j
/// earlier decisions (bits, mapped 0 -> +1, 1 -> -1).
double plus_decoder_forward(std::span<const double> llr, std::span<const std::uint8_t> decoded_prefix,
                            const AttentionPositionNet& net, bool training, std::uint64_t dropout_seed = 0);

}  // namespace dpp
