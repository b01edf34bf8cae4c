#include "deeppolar/neural_coder.hpp"

#include <cmath>

#include "deeppolar/attention.hpp"

namespace dpp {

namespace {

// LeCun-normal init, the fan-in scaling SELU networks expect.
Matrix lecun_normal(Eigen::Index out, Eigen::Index in, Rng& rng) {
  return gaussian_matrix(rng, out, in, 1.0 / std::sqrt(static_cast<double>(in)));
}

Matrix zeros_row(Eigen::Index width) { return Matrix::Zero(1, width); }

std::string node_prefix(const char* tree, int level, int pos) {
  return std::string(tree) + "/l" + std::to_string(level) + "/n" + std::to_string(pos);
}

int int_pow(int base, int exp) {
  int r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

std::string to_string(DecoderKind kind) { return kind == DecoderKind::Plus ? "plus" : "deeppolar"; }

DecoderKind decoder_kind_from_string(const std::string& name) {
  if (name == "plus") return DecoderKind::Plus;
  if (name == "deeppolar") return DecoderKind::DeepPolar;
  throw ConfigError("unknown decoder kind '" + name + "' (expected plus or deeppolar)");
}

void ModelConfig::validate() const {
  if (enc_hidden < 1 || enc_layers < 1 || skip_layers < 1)
    throw ConfigError("encoder hidden width, depth and skip depth must be positive");
  if (dec_hidden < 1 || dec_layers < 1) throw ConfigError("decoder hidden width and depth must be positive");
  if (decoder == DecoderKind::Plus) {
    if (heads < 1 || head_dim < 1) throw ConfigError("attention heads and head_dim must be positive");
    if (heads * head_dim != dec_hidden)
      throw ConfigError("attention requires heads * head_dim == dec_hidden (" + std::to_string(heads) + " * " +
                        std::to_string(head_dim) + " != " + std::to_string(dec_hidden) + ")");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
}

// ---- EncoderKernel ------------------------------------------------------------

EncoderKernel::EncoderKernel(int ell, const ModelConfig& model, Rng& rng)
    : ell_(ell), layers_(model.enc_layers), skip_layers_(model.skip_layers), augment_(model.augment) {
  if (!is_power_of_two(ell) || ell < 2) throw ConfigError("encoder kernel size must be a power of two");
  polar_t_ = polar_matrix(ell).cast<double>().transpose();
  const int h = model.enc_hidden;
  for (int l = 0; l < layers_; ++l) {
    params_.add("w" + std::to_string(l), lecun_normal(h, l == 0 ? ell : h, rng));
    params_.add("b" + std::to_string(l), zeros_row(h));
  }
  params_.add("w_out", lecun_normal(ell, h, rng));
  params_.add("b_out", zeros_row(ell));
  for (int m = 0; m < skip_layers_; ++m) {
    params_.add("v" + std::to_string(m), lecun_normal(h, m == 0 ? 2 * ell : h, rng));
    params_.add("c" + std::to_string(m), zeros_row(h));
  }
}

ad::Var EncoderKernel::forward(ad::Tape& tape, ad::Var y) const {
  if (y.cols() != ell_)
    throw ConfigError("encoder kernel expects " + std::to_string(ell_) + " inputs, got " + std::to_string(y.cols()));
  const ad::Var a = ad::linear_fixed(y, polar_t_);
  ad::Var h = y;
  for (int l = 0; l < layers_; ++l)
    h = ad::selu(ad::linear(h, tape.param(params_[2 * l]), tape.param(params_[2 * l + 1])));
  const auto skip0 = static_cast<std::size_t>(2 * (layers_ + 1));
  const ad::Var ya[] = {y, a};
  ad::Var s = ad::concat_cols(ya);
  for (int m = 0; m < skip_layers_; ++m) {
    s = ad::linear(s, tape.param(params_[skip0 + 2 * m]), tape.param(params_[skip0 + 2 * m + 1]));
    if (m + 1 < skip_layers_) s = ad::selu(s);
  }
  const auto out_w = static_cast<std::size_t>(2 * layers_);
  ad::Var out = ad::linear(ad::add(h, s), tape.param(params_[out_w]), tape.param(params_[out_w + 1]));
  if (augment_) out = ad::add(out, a);
  return out;
}

Matrix EncoderKernel::apply(const Matrix& y) const {
  ad::Tape tape(false);
  return forward(tape, tape.constant(y)).value();
}

// ---- decoder position networks ------------------------------------------------

MlpPositionNet::MlpPositionNet(int inputs, int hidden, int layers, Rng& rng) : inputs_(inputs), layers_(layers) {
  for (int l = 0; l < layers_; ++l) {
    params_.add("u" + std::to_string(l), lecun_normal(hidden, l == 0 ? inputs : hidden, rng));
    params_.add("ub" + std::to_string(l), zeros_row(hidden));
  }
  params_.add("u_out", lecun_normal(1, hidden, rng));
  params_.add("ub_out", zeros_row(1));
}

ad::Var MlpPositionNet::forward(ad::Tape& tape, ad::Var input, bool) const {
  if (input.cols() != inputs_)
    throw ConfigError("position network expects " + std::to_string(inputs_) + " inputs, got " +
                      std::to_string(input.cols()));
  ad::Var h = input;
  for (int l = 0; l < layers_; ++l)
    h = ad::selu(ad::linear(h, tape.param(params_[2 * l]), tape.param(params_[2 * l + 1])));
  const auto o = static_cast<std::size_t>(2 * layers_);
  return ad::linear(h, tape.param(params_[o]), tape.param(params_[o + 1]));
}

std::unique_ptr<PositionNet> make_position_net(int ell, int position, const ModelConfig& model, Rng& rng) {
  const int inputs = ell + position;
  if (model.decoder == DecoderKind::Plus) return std::make_unique<AttentionPositionNet>(inputs, model, rng);
  return std::make_unique<MlpPositionNet>(inputs, model.dec_hidden, model.dec_layers, rng);
}

// ---- DecoderKernel ------------------------------------------------------------

DecoderKernel::DecoderKernel(int ell, const ModelConfig& model, Rng& rng) {
  nets_.reserve(static_cast<std::size_t>(ell));
  for (int j = 0; j < ell; ++j) nets_.push_back(make_position_net(ell, j, model, rng));
}

DecoderKernel::DecoderKernel(const DecoderKernel& other) {
  nets_.reserve(other.nets_.size());
  for (const auto& n : other.nets_) nets_.push_back(n->clone());
}

DecoderKernel& DecoderKernel::operator=(const DecoderKernel& other) {
  if (this != &other) {
    DecoderKernel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void DecoderKernel::set_prefix(const std::string& prefix) {
  for (std::size_t j = 0; j < nets_.size(); ++j) nets_[j]->params().set_prefix(prefix + "/j" + std::to_string(j));
}

void DecoderKernel::append_params(ad::ParameterList& out) {
  for (auto& n : nets_) n->params().append_to(out);
}

void DecoderKernel::append_params(ad::ConstParameterList& out) const {
  for (const auto& n : nets_) n->params().append_to(out);
}

void DecoderKernel::set_zero() {
  for (auto& n : nets_) n->params().set_zero();
}

// ---- trees --------------------------------------------------------------------

EncoderTree::EncoderTree(const CodeConfig& code, const ModelConfig& model, Rng& rng) : code_(code), model_(model) {
  model_.validate();
  kernels_.resize(static_cast<std::size_t>(code.depth()));
  for (int t = 0; t < code.depth(); ++t) {
    const int count = int_pow(code.ell(), t);
    for (int b = 0; b < count; ++b) {
      EncoderKernel k(code.ell(), model_, rng);
      k.params().set_prefix(node_prefix("enc", t, b));
      kernels_[static_cast<std::size_t>(t)].push_back(std::move(k));
    }
  }
}

int EncoderTree::nodes_at(int level) const { return int_pow(code_.ell(), level); }

void EncoderTree::rebind(const CodeConfig& code) {
  if (code.n() != code_.n() || code.ell() != code_.ell())
    throw ConfigError("rebind: code shape (n, ell) must stay the same");
  code_ = code;
}

EncoderKernel& EncoderTree::kernel(int level, int pos) {
  return kernels_.at(static_cast<std::size_t>(level)).at(static_cast<std::size_t>(pos));
}

const EncoderKernel& EncoderTree::kernel(int level, int pos) const {
  return kernels_.at(static_cast<std::size_t>(level)).at(static_cast<std::size_t>(pos));
}

Matrix EncoderTree::embed_symbols(const BitMatrix& messages) const {
  if (messages.cols() != code_.k())
    throw ConfigError("message length " + std::to_string(messages.cols()) + " does not match k=" +
                      std::to_string(code_.k()));
  Matrix sym = Matrix::Zero(messages.rows(), code_.n());
  for (int j = 0; j < code_.k(); ++j) {
    const int pos = code_.info_set()[static_cast<std::size_t>(j)];
    for (Eigen::Index r = 0; r < messages.rows(); ++r) sym(r, pos) = messages(r, j) ? -1.0 : 1.0;
  }
  return sym;
}

ad::Var EncoderTree::encode_node(ad::Tape& tape, NodeId node, ad::Var symbols,
                                 std::vector<std::vector<Matrix>>* trace) const {
  const int ell = code_.ell();
  const int block = code_.n() / int_pow(ell, node.level);
  if (symbols.cols() != block) throw ConfigError("encode_node: symbol block has the wrong width");
  const int groups = block / ell;
  const EncoderKernel& k = kernel(node.level, node.pos);
  ad::Var out;
  if (groups == 1) {
    out = k.forward(tape, symbols);
  } else {
    std::vector<ad::Var> parts;
    parts.reserve(static_cast<std::size_t>(ell));
    for (int i = 0; i < ell; ++i)
      parts.push_back(encode_node(tape, {node.level + 1, node.pos * ell + i},
                                  ad::slice_cols(symbols, i * groups, groups), trace));
    out = ad::ungroup_columns(k.forward(tape, ad::group_columns(ad::concat_cols(parts), ell)), groups);
  }
  if (trace) {
    if (trace->size() != static_cast<std::size_t>(levels())) {
      trace->assign(static_cast<std::size_t>(levels()), {});
      for (int t = 0; t < levels(); ++t) (*trace)[static_cast<std::size_t>(t)].resize(static_cast<std::size_t>(nodes_at(t)));
    }
    (*trace)[static_cast<std::size_t>(node.level)][static_cast<std::size_t>(node.pos)] = out.value();
  }
  return out;
}

ad::Var EncoderTree::forward(ad::Tape& tape, const BitMatrix& messages,
                             std::vector<std::vector<Matrix>>* trace) const {
  return encode_node(tape, {0, 0}, tape.constant(embed_symbols(messages)), trace);
}

ad::ParameterList EncoderTree::parameters() {
  ad::ParameterList out;
  for (auto& level : kernels_)
    for (auto& k : level) k.params().append_to(out);
  return out;
}

ad::ConstParameterList EncoderTree::parameters() const {
  ad::ConstParameterList out;
  for (const auto& level : kernels_)
    for (const auto& k : level) k.params().append_to(out);
  return out;
}

void EncoderTree::set_zero() {
  for (auto& level : kernels_)
    for (auto& k : level) k.params().set_zero();
}

DecoderTree::DecoderTree(const CodeConfig& code, const ModelConfig& model, Rng& rng) : code_(code), model_(model) {
  model_.validate();
  kernels_.resize(static_cast<std::size_t>(code.depth()));
  for (int t = 0; t < code.depth(); ++t) {
    const int count = int_pow(code.ell(), t);
    for (int b = 0; b < count; ++b) {
      DecoderKernel k(code.ell(), model_, rng);
      k.set_prefix(node_prefix("dec", t, b));
      kernels_[static_cast<std::size_t>(t)].push_back(std::move(k));
    }
  }
}

int DecoderTree::nodes_at(int level) const { return int_pow(code_.ell(), level); }

void DecoderTree::rebind(const CodeConfig& code) {
  if (code.n() != code_.n() || code.ell() != code_.ell())
    throw ConfigError("rebind: code shape (n, ell) must stay the same");
  code_ = code;
}

DecoderKernel& DecoderTree::kernel(int level, int pos) {
  return kernels_.at(static_cast<std::size_t>(level)).at(static_cast<std::size_t>(pos));
}

const DecoderKernel& DecoderTree::kernel(int level, int pos) const {
  return kernels_.at(static_cast<std::size_t>(level)).at(static_cast<std::size_t>(pos));
}

ad::ParameterList DecoderTree::parameters() {
  ad::ParameterList out;
  for (auto& level : kernels_)
    for (auto& k : level) k.append_params(out);
  return out;
}

ad::ConstParameterList DecoderTree::parameters() const {
  ad::ConstParameterList out;
  for (const auto& level : kernels_)
    for (const auto& k : level) k.append_params(out);
  return out;
}

void DecoderTree::set_zero() {
  for (auto& level : kernels_)
    for (auto& k : level) k.set_zero();
}

// ---- encode / decode ------------------------------------------------------------

Matrix encode_tree(const BitMatrix& messages, const EncoderTree& tree, const PowerNormalizer& norm) {
  ad::Tape tape(false);
  return norm.apply(tree.forward(tape, messages).value());
}

Matrix encode_tree(const BitMatrix& messages, const EncoderTree& tree) {
  ad::Tape tape(false);
  return normalize_power(tree.forward(tape, messages).value());
}

namespace {

struct SuccessiveCancellation {
  ad::Tape& tape;
  const DecoderTree& dec;
  const EncoderTree& enc;
  const DecodeOptions& opt;
  Eigen::Index batch;
  bool genie;
  Matrix genie_symbols;
  std::vector<std::vector<Matrix>> genie_trace;
  std::vector<std::vector<std::uint8_t>> all_frozen;
  std::vector<ad::Var> leaf_logits;
  BitMatrix decisions;

  SuccessiveCancellation(ad::Tape& t, const DecoderTree& d, const EncoderTree& e, const DecodeOptions& o,
                         Eigen::Index b)
      : tape(t), dec(d), enc(e), opt(o), batch(b), genie(o.feedback == Feedback::Genie) {
    const CodeConfig& code = dec.code();
    if (genie) {
      if (!opt.genie_messages) throw ConfigError("genie feedback needs the transmitted messages");
      if (opt.genie_messages->rows() != batch) throw ConfigError("genie messages do not match the batch size");
      genie_symbols = enc.embed_symbols(*opt.genie_messages);
      ad::Tape scratch(false);
      enc.forward(scratch, *opt.genie_messages, &genie_trace);
    }
    all_frozen.resize(static_cast<std::size_t>(code.depth()) + 1);
    for (int t = 0; t <= code.depth(); ++t) {
      const int count = int_pow(code.ell(), t);
      const int block = code.n() / count;
      auto& row = all_frozen[static_cast<std::size_t>(t)];
      row.assign(static_cast<std::size_t>(count), 1);
      for (int b = 0; b < count; ++b)
        for (int i = b * block; i < (b + 1) * block; ++i)
          if (!code.is_frozen(i)) row[static_cast<std::size_t>(b)] = 0;
    }
    leaf_logits.resize(static_cast<std::size_t>(code.n()));
    decisions = BitMatrix::Zero(batch, code.n());
  }

  Matrix frozen_subtree_code(NodeId node) {
    if (genie) return genie_trace[static_cast<std::size_t>(node.level)][static_cast<std::size_t>(node.pos)];
    const int block = dec.code().n() / int_pow(dec.code().ell(), node.level);
    ad::Tape scratch(false);
    return enc.encode_node(scratch, node, scratch.constant(Matrix::Zero(batch, block))).value();
  }

  // Decodes node (level, pos) given its B x block channel vector and returns
  // the node's re-encoded sub-codeword (B x block).
  Matrix run(NodeId node, ad::Var llr) {
    const CodeConfig& code = dec.code();
    const int ell = code.ell();
    const int block = code.n() / int_pow(ell, node.level);
    const int groups = block / ell;
    const DecoderKernel& kernel = dec.kernel(node.level, node.pos);
    std::vector<ad::Var> inputs;
    inputs.push_back(groups == 1 ? llr : ad::group_columns(llr, ell));
    std::vector<Matrix> codes;
    codes.reserve(static_cast<std::size_t>(ell));
    for (int j = 0; j < ell; ++j) {
      const NodeId child{node.level + 1, node.pos * ell + j};
      Matrix child_code;
      if (groups == 1) {
        const int p = child.pos;
        if (code.is_frozen(p)) {
          child_code = Matrix::Zero(batch, 1);
        } else {
          const ad::Var logit = kernel.net(j).forward(tape, ad::concat_cols(inputs), opt.training);
          leaf_logits[static_cast<std::size_t>(p)] = logit;
          for (Eigen::Index r = 0; r < batch; ++r) decisions(r, p) = logit.value()(r, 0) < 0.0 ? 1 : 0;
          if (genie) {
            child_code = genie_symbols.col(p);
          } else {
            child_code.resize(batch, 1);
            for (Eigen::Index r = 0; r < batch; ++r) child_code(r, 0) = decisions(r, p) ? -1.0 : 1.0;
          }
        }
      } else if (all_frozen[static_cast<std::size_t>(child.level)][static_cast<std::size_t>(child.pos)]) {
        child_code = frozen_subtree_code(child);
      } else {
        const ad::Var logit = kernel.net(j).forward(tape, ad::concat_cols(inputs), opt.training);
        child_code = run(child, ad::reshape(logit, batch, groups));
      }
      if (j + 1 < ell)
        inputs.push_back(tape.constant(Eigen::Map<const Matrix>(child_code.data(), batch * groups, 1)));
      codes.push_back(std::move(child_code));
    }
    if (node.level == 0) return {};
    if (genie) return genie_trace[static_cast<std::size_t>(node.level)][static_cast<std::size_t>(node.pos)];
    Matrix joined(batch, block);
    for (int i = 0; i < ell; ++i) joined.middleCols(i * groups, groups) = codes[static_cast<std::size_t>(i)];
    const EncoderKernel& ek = enc.kernel(node.level, node.pos);
    if (groups == 1) return ek.apply(joined);
    ad::Tape scratch(false);
    return ad::ungroup_columns(ek.forward(scratch, ad::group_columns(scratch.constant(joined), ell)), groups).value();
  }
};

}  // namespace

DecodeTrace decode_tree(ad::Tape& tape, ad::Var llr, const DecoderTree& decoder, const EncoderTree& encoder,
                        const DecodeOptions& options) {
  const CodeConfig& code = decoder.code();
  if (!(encoder.code() == code)) throw ConfigError("encoder and decoder trees use different code configurations");
  if (llr.cols() != code.n())
    throw ConfigError("decoder expects " + std::to_string(code.n()) + " LLRs, got " + std::to_string(llr.cols()));
  if (!llr.value().allFinite()) throw DomainError("decoder input contains NaN or Inf");
  SuccessiveCancellation sc(tape, decoder, encoder, options, llr.rows());
  sc.run({0, 0}, llr);

  DecodeTrace out;
  out.bits = code.extract(sc.decisions);
  out.logits = Matrix::Zero(llr.rows(), code.n());
  std::vector<ad::Var> info;
  for (int p : code.info_set()) {
    const ad::Var v = sc.leaf_logits[static_cast<std::size_t>(p)];
    out.logits.col(p) = v.value().col(0);
    info.push_back(v);
  }
  out.info_logits = info.empty() ? tape.constant(Matrix::Zero(llr.rows(), 0)) : ad::concat_cols(info);
  return out;
}

DecodeResult decode_tree(const Matrix& llr, const DecoderTree& decoder, const EncoderTree& encoder) {
  ad::Tape tape(false);
  DecodeTrace t = decode_tree(tape, tape.constant(llr), decoder, encoder);
  return DecodeResult{std::move(t.bits), std::move(t.logits)};
}

}  // namespace dpp
