#pragma once

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "deeppolar/common.hpp"
#include "deeppolar/rng.hpp"

// Minimal reverse-mode automatic differentiation over batched dense matrices.
// Every op records its output value and, when any input requires a gradient,
// a closure that pushes the output gradient back to its inputs. A Tape is
// single-use: build the graph, call backward() once, read parameter grads.
namespace dpp::ad {

/// A learnable array with an accumulated gradient of the same shape.
struct Parameter {
  std::string name;
  Matrix value;
  // Accumulator written by Tape::backward; not part of the parameter's state.
  mutable Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v);
  void zero_grad() const { grad.setZero(value.rows(), value.cols()); }
  Eigen::Index size() const { return value.size(); }
};

using ParameterList = std::vector<Parameter*>;
using ConstParameterList = std::vector<const Parameter*>;

/// Owns a module's parameters with address-stable storage; modules refer to
/// entries by index so copies rebind correctly. Full names are prefix/local.
class ParamStore {
 public:
  std::size_t add(std::string local, Matrix value);
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  void set_prefix(const std::string& prefix);
  const std::string& prefix() const { return prefix_; }
  void append_to(ParameterList& out);
  void append_to(ConstParameterList& out) const;
  void set_zero();

 private:
  std::string prefix_;
  std::vector<std::string> locals_;
  std::deque<Parameter> params_;
};

class Tape;

class Var {
 public:
  Var() = default;
  bool valid() const { return tape_ != nullptr; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* t, int id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using Backward = std::function<void(const Matrix& grad_out)>;

  /// grad_enabled = false records values only (inference).
  explicit Tape(bool grad_enabled = true, std::uint64_t seed = 0);
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }
  Rng& rng() { return rng_; }

  Var constant(Matrix value);
  /// Leaf bound to a parameter; backward() adds into p.grad. On a tape with
  /// gradients disabled this is a plain constant.
  Var param(const Parameter& p);

  const Matrix& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id_)].value; }
  bool needs_grad(Var v) const {
    return v.valid() && nodes_[static_cast<std::size_t>(v.id_)].needs_grad;
  }
  /// Gradient of the last backward() root w.r.t. v (zeros if unreached).
  Matrix grad(Var v) const;

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates to all leaves.
  void backward(Var root);

  // Op-author interface.
  bool any_needs_grad(std::initializer_list<Var> inputs) const;
  Var record(Matrix value, bool needs_grad, Backward backward);
  void accumulate(Var v, const Matrix& g);
  template <typename Expr>
  void accumulate_expr(Var v, const Expr& g) {
    if (!needs_grad(v)) return;
    Node& node = nodes_[static_cast<std::size_t>(v.id_)];
    if (node.grad.size() == 0)
      node.grad = g;
    else
      node.grad += g;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    Backward backward;
    const Parameter* param = nullptr;
  };
  bool grad_enabled_;
  Rng rng_;
  std::vector<Node> nodes_;
};

// ---- ops ------------------------------------------------------------------

/// x * w^T + b for x (r x in), w (out x in), b (1 x out, optional).
Var linear(Var x, Var w, Var b = {});
/// a * b.
Var matmul(Var a, Var b);
/// x * m^T for a fixed (non-learnable) matrix m.
Var linear_fixed(Var x, const Matrix& m);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
Var selu(Var a);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var gather_cols(Var a, std::span<const int> columns);
/// Row-major reinterpretation; rows * cols must equal a.size().
Var reshape(Var a, Eigen::Index rows, Eigen::Index cols);
/// B x (ell*C) -> (B*C) x ell with out(b*C + c, i) = a(b, i*C + c).
Var group_columns(Var a, int ell);
/// Inverse of group_columns: (B*C) x ell -> B x (ell*C).
Var ungroup_columns(Var a, Eigen::Index groups);
/// Whole-batch zero-mean unit-power normalization (gradient flows through the statistics).
Var normalize_power(Var a);
/// Token embedding: x (r x T) scalars -> (r*T) x h rows, row (b*T+t) = x(b,t) * weight.col(t)^T + bias.row(t).
Var token_embed(Var x, Var weight, Var bias);
/// Multi-head self-attention over r sequences of length T stored as (r*T) x h rows.
/// wq/wk/wv are h x (heads*d_k), wo is (heads*d_k) x h.
Var multi_head_self_attention(Var x, Eigen::Index tokens, Var wq, Var wk, Var wv, Var wo, int heads);
/// Row-wise layer normalization with learned gain/bias (1 x h).
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
/// Inverted dropout using the tape's RNG; identity when !training or rate == 0.
Var dropout(Var x, double rate, bool training);
/// (r*T) x h -> r x h token mean.
Var mean_pool(Var x, Eigen::Index tokens);
/// Sum of entries -> 1 x 1.
Var sum(Var a);

// Non-differentiable helpers used by the ops and their oracles.
double selu_value(double x);
double selu_derivative(double x);
Matrix softmax_rows(const Matrix& scores);

struct SeluConstants {
  static constexpr double lambda = 1.0507009873554804934193349852946;
  static constexpr double alpha = 1.6732632423543772848170429916717;
};

}  // namespace dpp::ad
