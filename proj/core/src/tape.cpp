#include "deeppolar/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace dpp::ad {

Parameter::Parameter(std::string n, Matrix v)
    : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

const Matrix& Var::value() const { return tape_->value(*this); }

Tape::Tape(bool grad_enabled, std::uint64_t seed) : grad_enabled_(grad_enabled), rng_(seed) {
  nodes_.reserve(256);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(const Parameter& p) {
  nodes_.push_back(Node{p.value, {}, grad_enabled_, {}, grad_enabled_ ? &p : nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

bool Tape::any_needs_grad(std::initializer_list<Var> inputs) const {
  if (!grad_enabled_) return false;
  for (Var v : inputs)
    if (needs_grad(v)) return true;
  return false;
}

Var Tape::record(Matrix value, bool needs_grad, Backward backward) {
  nodes_.push_back(Node{std::move(value), {}, needs_grad && grad_enabled_,
                        needs_grad && grad_enabled_ ? std::move(backward) : Backward{}, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(Var v, const Matrix& g) { accumulate_expr(v, g); }

Matrix Tape::grad(Var v) const {
  const Node& node = nodes_[static_cast<std::size_t>(v.id_)];
  if (node.grad.size() == 0) return Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::backward(Var root) {
  if (root.tape_ != this) throw ConfigError("backward root belongs to a different tape");
  if (root.rows() != 1 || root.cols() != 1) throw ConfigError("backward root must be a scalar");
  if (!needs_grad(root)) return;
  for (Node& node : nodes_) node.grad.resize(0, 0);
  nodes_[static_cast<std::size_t>(root.id_)].grad = Matrix::Ones(1, 1);
  for (int id = root.id_; id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.needs_grad || node.grad.size() == 0) continue;
    if (node.backward) node.backward(node.grad);
    if (node.param) {
      const Parameter& p = *node.param;
      if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) p.zero_grad();
      p.grad += node.grad;
    }
  }
}

std::size_t ParamStore::add(std::string local, Matrix value) {
  const std::string full = prefix_.empty() ? local : prefix_ + "/" + local;
  locals_.push_back(std::move(local));
  params_.emplace_back(full, std::move(value));
  return params_.size() - 1;
}

void ParamStore::set_prefix(const std::string& prefix) {
  prefix_ = prefix;
  for (std::size_t i = 0; i < params_.size(); ++i)
    params_[i].name = prefix_.empty() ? locals_[i] : prefix_ + "/" + locals_[i];
}

void ParamStore::append_to(ParameterList& out) {
  for (auto& p : params_) out.push_back(&p);
}

void ParamStore::append_to(ConstParameterList& out) const {
  for (const auto& p : params_) out.push_back(&p);
}

void ParamStore::set_zero() {
  for (auto& p : params_) p.value.setZero();
}

// ---- helpers ----------------------------------------------------------------

double selu_value(double x) {
  return x > 0.0 ? SeluConstants::lambda * x : SeluConstants::lambda * SeluConstants::alpha * std::expm1(x);
}

double selu_derivative(double x) {
  return x > 0.0 ? SeluConstants::lambda : SeluConstants::lambda * SeluConstants::alpha * std::exp(x);
}

Matrix softmax_rows(const Matrix& scores) {
  Matrix out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double m = scores.row(i).maxCoeff();
    out.row(i) = (scores.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

// ---- ops --------------------------------------------------------------------

Var linear(Var x, Var w, Var b) {
  Tape& t = x.tape();
  require(x.cols() == w.cols(), "linear: input width does not match weight columns");
  Matrix out(x.rows(), w.rows());
  out.noalias() = x.value() * w.value().transpose();
  if (b.valid()) {
    require(b.rows() == 1 && b.cols() == w.rows(), "linear: bias must be 1 x out");
    out.rowwise() += b.value().row(0);
  }
  const bool ng = t.any_needs_grad({x, w, b});
  return t.record(std::move(out), ng, [x, w, b](const Matrix& g) {
    Tape& tp = x.tape();
    if (tp.needs_grad(x)) tp.accumulate_expr(x, g * w.value());
    if (tp.needs_grad(w)) tp.accumulate_expr(w, g.transpose() * x.value());
    if (b.valid() && tp.needs_grad(b)) tp.accumulate_expr(b, g.colwise().sum());
  });
}

Var matmul(Var a, Var b) {
  Tape& t = a.tape();
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  out.noalias() = a.value() * b.value();
  return t.record(std::move(out), t.any_needs_grad({a, b}), [a, b](const Matrix& g) {
    Tape& tp = a.tape();
    if (tp.needs_grad(a)) tp.accumulate_expr(a, g * b.value().transpose());
    if (tp.needs_grad(b)) tp.accumulate_expr(b, a.value().transpose() * g);
  });
}

Var linear_fixed(Var x, const Matrix& m) {
  Tape& t = x.tape();
  require(x.cols() == m.cols(), "linear_fixed: width mismatch");
  Matrix out(x.rows(), m.rows());
  out.noalias() = x.value() * m.transpose();
  return t.record(std::move(out), t.any_needs_grad({x}),
                  [x, m](const Matrix& g) { x.tape().accumulate_expr(x, g * m); });
}

Var add(Var a, Var b) {
  Tape& t = a.tape();
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  return t.record(a.value() + b.value(), t.any_needs_grad({a, b}), [a, b](const Matrix& g) {
    a.tape().accumulate(a, g);
    b.tape().accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = a.tape();
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shape mismatch");
  return t.record(a.value() - b.value(), t.any_needs_grad({a, b}), [a, b](const Matrix& g) {
    a.tape().accumulate(a, g);
    b.tape().accumulate_expr(b, -g);
  });
}

Var scale(Var a, double s) {
  Tape& t = a.tape();
  return t.record(s * a.value(), t.any_needs_grad({a}),
                  [a, s](const Matrix& g) { a.tape().accumulate_expr(a, s * g); });
}

Var selu(Var a) {
  Tape& t = a.tape();
  Matrix out = a.value().unaryExpr([](double v) { return selu_value(v); });
  return t.record(std::move(out), t.any_needs_grad({a}), [a](const Matrix& g) {
    a.tape().accumulate_expr(
        a, g.cwiseProduct(a.value().unaryExpr([](double v) { return selu_derivative(v); })));
  });
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  Tape& t = parts.front().tape();
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  bool ng = false;
  for (const Var& p : parts) {
    require(p.rows() == rows, "concat_cols: row mismatch");
    cols += p.cols();
    ng = ng || t.any_needs_grad({p});
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), ng, [inputs](const Matrix& g) {
    Eigen::Index pos = 0;
    for (const Var& p : inputs) {
      p.tape().accumulate_expr(p, g.middleCols(pos, p.cols()));
      pos += p.cols();
    }
  });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  Tape& t = a.tape();
  require(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols: out of range");
  Matrix out = a.value().middleCols(start, count);
  return t.record(std::move(out), t.any_needs_grad({a}), [a, start, count](const Matrix& g) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    full.middleCols(start, count) = g;
    a.tape().accumulate(a, full);
  });
}

Var gather_cols(Var a, std::span<const int> columns) {
  Tape& t = a.tape();
  Matrix out(a.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    require(columns[j] >= 0 && columns[j] < a.cols(), "gather_cols: index out of range");
    out.col(static_cast<Eigen::Index>(j)) = a.value().col(columns[j]);
  }
  std::vector<int> cols(columns.begin(), columns.end());
  return t.record(std::move(out), t.any_needs_grad({a}), [a, cols](const Matrix& g) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t j = 0; j < cols.size(); ++j) full.col(cols[j]) += g.col(static_cast<Eigen::Index>(j));
    a.tape().accumulate(a, full);
  });
}

Var reshape(Var a, Eigen::Index rows, Eigen::Index cols) {
  Tape& t = a.tape();
  require(rows * cols == a.value().size(), "reshape: size mismatch");
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  const Eigen::Index r0 = a.rows();
  const Eigen::Index c0 = a.cols();
  return t.record(std::move(out), t.any_needs_grad({a}), [a, r0, c0](const Matrix& g) {
    a.tape().accumulate_expr(a, Eigen::Map<const Matrix>(g.data(), r0, c0));
  });
}

Var group_columns(Var a, int ell) {
  Tape& t = a.tape();
  require(ell > 0 && a.cols() % ell == 0, "group_columns: width not divisible by ell");
  const Eigen::Index batch = a.rows();
  const Eigen::Index groups = a.cols() / ell;
  const Matrix& in = a.value();
  Matrix out(batch * groups, ell);
  for (Eigen::Index b = 0; b < batch; ++b)
    for (Eigen::Index c = 0; c < groups; ++c)
      for (int i = 0; i < ell; ++i) out(b * groups + c, i) = in(b, i * groups + c);
  return t.record(std::move(out), t.any_needs_grad({a}), [a, ell, batch, groups](const Matrix& g) {
    Matrix back(batch, ell * groups);
    for (Eigen::Index b = 0; b < batch; ++b)
      for (Eigen::Index c = 0; c < groups; ++c)
        for (int i = 0; i < ell; ++i) back(b, i * groups + c) = g(b * groups + c, i);
    a.tape().accumulate(a, back);
  });
}

Var ungroup_columns(Var a, Eigen::Index groups) {
  Tape& t = a.tape();
  require(groups > 0 && a.rows() % groups == 0, "ungroup_columns: rows not divisible by group count");
  const Eigen::Index batch = a.rows() / groups;
  const auto ell = a.cols();
  const Matrix& in = a.value();
  Matrix out(batch, ell * groups);
  for (Eigen::Index b = 0; b < batch; ++b)
    for (Eigen::Index c = 0; c < groups; ++c)
      for (Eigen::Index i = 0; i < ell; ++i) out(b, i * groups + c) = in(b * groups + c, i);
  return t.record(std::move(out), t.any_needs_grad({a}), [a, ell, batch, groups](const Matrix& g) {
    Matrix back(batch * groups, ell);
    for (Eigen::Index b = 0; b < batch; ++b)
      for (Eigen::Index c = 0; c < groups; ++c)
        for (Eigen::Index i = 0; i < ell; ++i) back(b * groups + c, i) = g(b, i * groups + c);
    a.tape().accumulate(a, back);
  });
}

Var normalize_power(Var a) {
  Tape& t = a.tape();
  const double mean = a.value().mean();
  Matrix centered = (a.value().array() - mean).matrix();
  const double power = centered.array().square().mean();
  if (!(power > 1e-300)) throw DomainError("degenerate batch: zero variance, power normalization undefined");
  const double s = std::sqrt(power);
  Matrix out = centered / s;
  auto y = std::make_shared<Matrix>(out);
  return t.record(std::move(out), t.any_needs_grad({a}), [a, y, s](const Matrix& g) {
    const double gm = g.mean();
    const double gy = g.cwiseProduct(*y).mean();
    a.tape().accumulate_expr(a, ((g.array() - gm - y->array() * gy) / s).matrix());
  });
}

Var token_embed(Var x, Var weight, Var bias) {
  Tape& t = x.tape();
  const Eigen::Index rows = x.rows();
  const Eigen::Index tokens = x.cols();
  const Eigen::Index h = weight.rows();
  require(weight.cols() == tokens, "token_embed: weight needs one column per token");
  require(bias.rows() == tokens && bias.cols() == h, "token_embed: bias must be tokens x h");
  const Matrix& xv = x.value();
  const Matrix wt = weight.value().transpose();  // tokens x h
  const Matrix& bv = bias.value();
  Matrix out(rows * tokens, h);
  for (Eigen::Index b = 0; b < rows; ++b)
    for (Eigen::Index tk = 0; tk < tokens; ++tk)
      out.row(b * tokens + tk) = xv(b, tk) * wt.row(tk) + bv.row(tk);
  return t.record(std::move(out), t.any_needs_grad({x, weight, bias}),
                  [x, weight, bias, rows, tokens, h](const Matrix& g) {
                    Tape& tp = x.tape();
                    const Matrix& xv2 = x.value();
                    if (tp.needs_grad(x)) {
                      const Matrix wt2 = weight.value().transpose();
                      Matrix dx(rows, tokens);
                      for (Eigen::Index b = 0; b < rows; ++b)
                        for (Eigen::Index tk = 0; tk < tokens; ++tk)
                          dx(b, tk) = g.row(b * tokens + tk).dot(wt2.row(tk));
                      tp.accumulate(x, dx);
                    }
                    if (tp.needs_grad(weight) || tp.needs_grad(bias)) {
                      Matrix dwt = Matrix::Zero(tokens, h);
                      Matrix db = Matrix::Zero(tokens, h);
                      for (Eigen::Index b = 0; b < rows; ++b)
                        for (Eigen::Index tk = 0; tk < tokens; ++tk) {
                          dwt.row(tk) += xv2(b, tk) * g.row(b * tokens + tk);
                          db.row(tk) += g.row(b * tokens + tk);
                        }
                      tp.accumulate_expr(weight, dwt.transpose());
                      tp.accumulate(bias, db);
                    }
                  });
}

Var multi_head_self_attention(Var x, Eigen::Index tokens, Var wq, Var wk, Var wv, Var wo, int heads) {
  Tape& t = x.tape();
  const Eigen::Index h = x.cols();
  require(tokens > 0, "attention: sequence length must be positive");
  require(x.rows() % tokens == 0, "attention: rows not a multiple of the sequence length");
  require(heads > 0 && wq.cols() % heads == 0, "attention: projection width not divisible by heads");
  require(wq.rows() == h && wk.rows() == h && wv.rows() == h, "attention: projections must have h rows");
  require(wk.cols() == wq.cols() && wv.cols() == wq.cols(), "attention: q/k/v widths differ");
  require(wo.rows() == wq.cols() && wo.cols() == h, "attention: output projection shape");
  const Eigen::Index seqs = x.rows() / tokens;
  const Eigen::Index width = wq.cols();
  const Eigen::Index dk = width / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));
  const Eigen::Index T = tokens;

  auto q = std::make_shared<Matrix>(x.value() * wq.value());
  auto k = std::make_shared<Matrix>(x.value() * wk.value());
  auto v = std::make_shared<Matrix>(x.value() * wv.value());
  auto ctx = std::make_shared<Matrix>(Matrix::Zero(x.rows(), width));
  // Softmax weights for every (sequence, head): a T x T block each, row-major.
  auto weights = std::make_shared<std::vector<double>>(static_cast<std::size_t>(seqs * heads * T * T));
  const double* qd = q->data();
  const double* kd = k->data();
  const double* vd = v->data();
  double* cd = ctx->data();
  for (Eigen::Index s = 0; s < seqs; ++s)
    for (int hd = 0; hd < heads; ++hd) {
      double* a = weights->data() + (s * heads + hd) * T * T;
      const Eigen::Index off = hd * dk;
      for (Eigen::Index i = 0; i < T; ++i) {
        const double* qi = qd + (s * T + i) * width + off;
        double* ai = a + i * T;
        double mx = -INFINITY;
        for (Eigen::Index j = 0; j < T; ++j) {
          const double* kj = kd + (s * T + j) * width + off;
          double dot = 0.0;
          for (Eigen::Index d = 0; d < dk; ++d) dot += qi[d] * kj[d];
          ai[j] = dot * inv_sqrt;
          mx = std::max(mx, ai[j]);
        }
        double z = 0.0;
        for (Eigen::Index j = 0; j < T; ++j) z += ai[j] = std::exp(ai[j] - mx);
        double* ci = cd + (s * T + i) * width + off;
        for (Eigen::Index j = 0; j < T; ++j) {
          ai[j] /= z;
          const double* vj = vd + (s * T + j) * width + off;
          for (Eigen::Index d = 0; d < dk; ++d) ci[d] += ai[j] * vj[d];
        }
      }
    }
  Matrix out = (*ctx) * wo.value();
  const bool ng = t.any_needs_grad({x, wq, wk, wv, wo});
  return t.record(std::move(out), ng, [x, wq, wk, wv, wo, q, k, v, ctx, weights, seqs, T, heads, dk, width,
                                       inv_sqrt](const Matrix& g) {
    Tape& tp = x.tape();
    tp.accumulate_expr(wo, ctx->transpose() * g);
    const Matrix dctx = g * wo.value().transpose();
    Matrix dq = Matrix::Zero(q->rows(), width);
    Matrix dkm = Matrix::Zero(k->rows(), width);
    Matrix dv = Matrix::Zero(v->rows(), width);
    std::vector<double> ds(static_cast<std::size_t>(T * T));
    for (Eigen::Index s = 0; s < seqs; ++s)
      for (int hd = 0; hd < heads; ++hd) {
        const double* a = weights->data() + (s * heads + hd) * T * T;
        const Eigen::Index off = hd * dk;
        for (Eigen::Index i = 0; i < T; ++i) {
          const double* gi = dctx.data() + (s * T + i) * width + off;
          double row_dot = 0.0;
          for (Eigen::Index j = 0; j < T; ++j) {
            const double* vj = v->data() + (s * T + j) * width + off;
            double* dvj = dv.data() + (s * T + j) * width + off;
            const double aij = a[i * T + j];
            double da = 0.0;
            for (Eigen::Index d = 0; d < dk; ++d) {
              da += gi[d] * vj[d];
              dvj[d] += aij * gi[d];
            }
            ds[static_cast<std::size_t>(i * T + j)] = da;
            row_dot += da * aij;
          }
          for (Eigen::Index j = 0; j < T; ++j) {
            double& e = ds[static_cast<std::size_t>(i * T + j)];
            e = a[i * T + j] * (e - row_dot) * inv_sqrt;
          }
        }
        for (Eigen::Index i = 0; i < T; ++i) {
          const double* qi = q->data() + (s * T + i) * width + off;
          double* dqi = dq.data() + (s * T + i) * width + off;
          for (Eigen::Index j = 0; j < T; ++j) {
            const double e = ds[static_cast<std::size_t>(i * T + j)];
            const double* kj = k->data() + (s * T + j) * width + off;
            double* dkj = dkm.data() + (s * T + j) * width + off;
            for (Eigen::Index d = 0; d < dk; ++d) {
              dqi[d] += e * kj[d];
              dkj[d] += e * qi[d];
            }
          }
        }
      }
    const Matrix& xv = x.value();
    tp.accumulate_expr(wq, xv.transpose() * dq);
    tp.accumulate_expr(wk, xv.transpose() * dkm);
    tp.accumulate_expr(wv, xv.transpose() * dv);
    if (tp.needs_grad(x))
      tp.accumulate_expr(x, dq * wq.value().transpose() + dkm * wk.value().transpose() + dv * wv.value().transpose());
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  Tape& t = x.tape();
  const Eigen::Index h = x.cols();
  require(gain.rows() == 1 && gain.cols() == h && bias.rows() == 1 && bias.cols() == h,
          "layer_norm: gain/bias must be 1 x h");
  const Matrix& xv = x.value();
  auto xhat = std::make_shared<Matrix>(xv.rows(), h);
  auto inv_std = std::make_shared<Eigen::VectorXd>(xv.rows());
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    const double mu = xv.row(i).mean();
    const double var = (xv.row(i).array() - mu).square().mean();
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)(i) = inv;
    xhat->row(i) = (xv.row(i).array() - mu) * inv;
  }
  Matrix out = (xhat->array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += bias.value().row(0);
  return t.record(std::move(out), t.any_needs_grad({x, gain, bias}),
                  [x, gain, bias, xhat, inv_std](const Matrix& g) {
                    Tape& tp = x.tape();
                    tp.accumulate_expr(gain, g.cwiseProduct(*xhat).colwise().sum());
                    tp.accumulate_expr(bias, g.colwise().sum());
                    if (!tp.needs_grad(x)) return;
                    const Matrix dxhat = (g.array().rowwise() * gain.value().row(0).array()).matrix();
                    Matrix dx(dxhat.rows(), dxhat.cols());
                    for (Eigen::Index i = 0; i < dxhat.rows(); ++i) {
                      const double m1 = dxhat.row(i).mean();
                      const double m2 = dxhat.row(i).dot(xhat->row(i)) / static_cast<double>(dxhat.cols());
                      dx.row(i) = (*inv_std)(i) * (dxhat.row(i).array() - m1 - xhat->row(i).array() * m2).matrix();
                    }
                    tp.accumulate(x, dx);
                  });
}

Var dropout(Var x, double rate, bool training) {
  if (!training || rate <= 0.0) return x;
  require(rate < 1.0, "dropout rate must be < 1");
  Tape& t = x.tape();
  const double keep = 1.0 - rate;
  std::bernoulli_distribution coin(keep);
  auto mask = std::make_shared<Matrix>(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask->size(); ++i) mask->data()[i] = coin(t.rng()) ? 1.0 / keep : 0.0;
  Matrix out = x.value().cwiseProduct(*mask);
  return t.record(std::move(out), t.any_needs_grad({x}),
                  [x, mask](const Matrix& g) { x.tape().accumulate_expr(x, g.cwiseProduct(*mask)); });
}

Var mean_pool(Var x, Eigen::Index tokens) {
  Tape& t = x.tape();
  require(tokens > 0 && x.rows() % tokens == 0, "mean_pool: rows not a multiple of tokens");
  const Eigen::Index seqs = x.rows() / tokens;
  const Matrix& xv = x.value();
  Matrix out = Matrix::Zero(seqs, x.cols());
  for (Eigen::Index s = 0; s < seqs; ++s)
    for (Eigen::Index tk = 0; tk < tokens; ++tk) out.row(s) += xv.row(s * tokens + tk);
  out /= static_cast<double>(tokens);
  return t.record(std::move(out), t.any_needs_grad({x}), [x, seqs, tokens](const Matrix& g) {
    Matrix back(seqs * tokens, g.cols());
    const double inv = 1.0 / static_cast<double>(tokens);
    for (Eigen::Index s = 0; s < seqs; ++s)
      for (Eigen::Index tk = 0; tk < tokens; ++tk) back.row(s * tokens + tk) = g.row(s) * inv;
    x.tape().accumulate(x, back);
  });
}

Var sum(Var a) {
  Tape& t = a.tape();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(std::move(out), t.any_needs_grad({a}), [a](const Matrix& g) {
    a.tape().accumulate_expr(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

}  // namespace dpp::ad
