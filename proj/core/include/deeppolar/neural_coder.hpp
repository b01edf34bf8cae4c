#pragma once

#include <memory>
#include <string>
#include <vector>

#include "deeppolar/channel.hpp"
#include "deeppolar/common.hpp"
#include "deeppolar/polar.hpp"
#include "deeppolar/rng.hpp"
#include "deeppolar/tape.hpp"

namespace dpp {

enum class DecoderKind { DeepPolar, Plus };

std::string to_string(DecoderKind kind);
DecoderKind decoder_kind_from_string(const std::string& name);

/// Network shapes for both trees. Defaults are the full-scale values.
struct ModelConfig {
  int enc_hidden = 64;
  int enc_layers = 3;   // L: SELU layers on the main path
  int skip_layers = 2;  // M: layers on the skip path
  bool augment = true;  // alpha
  DecoderKind decoder = DecoderKind::Plus;
  int dec_hidden = 128;
  int dec_layers = 3;
  int heads = 4;
  int head_dim = 32;
  double dropout = 0.1;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Learned ell -> ell kernel g(y) = W_out(phi(...phi(W_1 y)) + s(y)) + alpha a(y),
/// polar augmentation a(y) = y G_ell and skip path s(y) over [y; a(y)].
class EncoderKernel {
 public:
  EncoderKernel() = default;
  EncoderKernel(int ell, const ModelConfig& model, Rng& rng);

  int ell() const { return ell_; }
  bool augment() const { return augment_; }
  void set_augment(bool on) { augment_ = on; }

  /// rows x ell -> rows x ell.
  ad::Var forward(ad::Tape& tape, ad::Var y) const;
  /// Gradient-free evaluation.
  Matrix apply(const Matrix& y) const;

  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }

 private:
  int ell_ = 0;
  int layers_ = 0;
  int skip_layers_ = 0;
  bool augment_ = true;
  Matrix polar_t_;  // G^T as reals, so linear_fixed(y, G^T) = y G
  ad::ParamStore params_;
};

/// Per-bit-position decision network of a decoder kernel. Position j consumes
/// exactly ell + j inputs [channel values; j earlier sibling codes] and emits
/// one logit (>= 0 decodes to 0).
class PositionNet {
 public:
  virtual ~PositionNet() = default;
  virtual ad::Var forward(ad::Tape& tape, ad::Var input, bool training) const = 0;
  virtual std::unique_ptr<PositionNet> clone() const = 0;
  virtual int inputs() const = 0;
  virtual ad::ParamStore& params() = 0;
  virtual const ad::ParamStore& params() const = 0;
};

/// Plain SELU multilayer perceptron (DeepPolar decoder component network).
class MlpPositionNet final : public PositionNet {
 public:
  MlpPositionNet(int inputs, int hidden, int layers, Rng& rng);
  ad::Var forward(ad::Tape& tape, ad::Var input, bool training) const override;
  std::unique_ptr<PositionNet> clone() const override { return std::make_unique<MlpPositionNet>(*this); }
  int inputs() const override { return inputs_; }
  ad::ParamStore& params() override { return params_; }
  const ad::ParamStore& params() const override { return params_; }

 private:
  int inputs_;
  int layers_;
  ad::ParamStore params_;
};

std::unique_ptr<PositionNet> make_position_net(int ell, int position, const ModelConfig& model, Rng& rng);

/// ell position networks sharing one tree node.
class DecoderKernel {
 public:
  DecoderKernel() = default;
  DecoderKernel(int ell, const ModelConfig& model, Rng& rng);
  DecoderKernel(const DecoderKernel& other);
  DecoderKernel& operator=(const DecoderKernel& other);
  DecoderKernel(DecoderKernel&&) noexcept = default;
  DecoderKernel& operator=(DecoderKernel&&) noexcept = default;

  int ell() const { return static_cast<int>(nets_.size()); }
  const PositionNet& net(int j) const { return *nets_[static_cast<std::size_t>(j)]; }
  PositionNet& net(int j) { return *nets_[static_cast<std::size_t>(j)]; }
  void set_prefix(const std::string& prefix);
  void append_params(ad::ParameterList& out);
  void append_params(ad::ConstParameterList& out) const;
  void set_zero();

 private:
  std::vector<std::unique_ptr<PositionNet>> nets_;
};

// Tree addressing: level 0 is the root; level t holds ell^t nodes and node
// (t, b) owns message positions [b * n / ell^t, (b + 1) * n / ell^t).
struct NodeId {
  int level = 0;
  int pos = 0;
};

class EncoderTree {
 public:
  EncoderTree() = default;
  EncoderTree(const CodeConfig& code, const ModelConfig& model, Rng& rng);

  const CodeConfig& code() const { return code_; }
  const ModelConfig& model() const { return model_; }
  int levels() const { return code_.depth(); }
  int nodes_at(int level) const;
  /// Swaps in a code with the same n and ell; kernels are kept.
  void rebind(const CodeConfig& code);
  EncoderKernel& kernel(int level, int pos);
  const EncoderKernel& kernel(int level, int pos) const;

  /// Bipolar embedding: info bit 0 -> +1, 1 -> -1, frozen -> 0 (B x n).
  Matrix embed_symbols(const BitMatrix& messages) const;

  /// Encodes symbol block of node (level, pos) (B x block) into its sub-codeword.
  /// If trace is given, every visited node's output is stored at trace[level][pos].
  ad::Var encode_node(ad::Tape& tape, NodeId node, ad::Var symbols,
                      std::vector<std::vector<Matrix>>* trace = nullptr) const;
  /// Unnormalized root output for B messages.
  ad::Var forward(ad::Tape& tape, const BitMatrix& messages,
                  std::vector<std::vector<Matrix>>* trace = nullptr) const;

  ad::ParameterList parameters();
  ad::ConstParameterList parameters() const;
  void set_zero();

 private:
  CodeConfig code_;
  ModelConfig model_;
  std::vector<std::vector<EncoderKernel>> kernels_;
};

class DecoderTree {
 public:
  DecoderTree() = default;
  DecoderTree(const CodeConfig& code, const ModelConfig& model, Rng& rng);

  const CodeConfig& code() const { return code_; }
  const ModelConfig& model() const { return model_; }
  int levels() const { return code_.depth(); }
  int nodes_at(int level) const;
  /// Swaps in a code with the same n and ell; kernels are kept.
  void rebind(const CodeConfig& code);
  DecoderKernel& kernel(int level, int pos);
  const DecoderKernel& kernel(int level, int pos) const;

  ad::ParameterList parameters();
  ad::ConstParameterList parameters() const;
  void set_zero();

 private:
  CodeConfig code_;
  ModelConfig model_;
  std::vector<std::vector<DecoderKernel>> kernels_;
};

/// Encoder output with power normalization fitted per batch (training) or
/// frozen from calibration (inference).
Matrix encode_tree(const BitMatrix& messages, const EncoderTree& tree, const PowerNormalizer& norm);
Matrix encode_tree(const BitMatrix& messages, const EncoderTree& tree);

enum class Feedback {
  Decisions,  // re-encode the decoder's own hard decisions (inference)
  Genie,      // feed the true sub-codewords of the transmitted message (training)
};

struct DecodeOptions {
  Feedback feedback = Feedback::Decisions;
  const BitMatrix* genie_messages = nullptr;  // required for Feedback::Genie
  bool training = false;
};

struct DecodeTrace {
  ad::Var info_logits;   // B x k decoder logits at info positions (in tape)
  BitMatrix bits;        // B x k hard decisions
  Matrix logits;         // B x n, zero at frozen positions
};

/// Neural successive cancellation on the tape; llr is B x n.
DecodeTrace decode_tree(ad::Tape& tape, ad::Var llr, const DecoderTree& decoder,
                        const EncoderTree& encoder, const DecodeOptions& options = {});

struct DecodeResult {
  BitMatrix bits;
  Matrix logits;
};

/// Inference path (no gradients, decision feedback). Throws DomainError on NaN.
DecodeResult decode_tree(const Matrix& llr, const DecoderTree& decoder, const EncoderTree& encoder);

}  // namespace dpp
