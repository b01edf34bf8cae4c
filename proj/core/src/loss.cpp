#include "deeppolar/loss.hpp"

#include <cmath>

namespace dpp {

namespace {

void check_shapes(const Matrix& logits, const BitMatrix& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols())
    throw ConfigError("loss: logits and targets differ in shape");
  if (logits.rows() == 0) throw ConfigError("loss: empty batch");
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// -log P(u | z) per entry.
double neg_log_prob(double z, std::uint8_t u) { return u ? softplus(-z) : softplus(z); }

// log(exp(s) + eps) without overflow/underflow.
double log_plus_eps(double s, double log_eps) {
  const double m = std::max(s, log_eps);
  return m + std::log(std::exp(s - m) + std::exp(log_eps - m));
}

}  // namespace

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double bce_loss(const Matrix& logits, const BitMatrix& targets) {
  check_shapes(logits, targets);
  if (logits.size() == 0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) acc += neg_log_prob(logits.data()[i], targets.data()[i]);
  return acc / static_cast<double>(logits.size());
}

double block_loss(const Matrix& logits, const BitMatrix& targets, const LossConfig& config) {
  check_shapes(logits, targets);
  if (!(config.epsilon > 0.0)) throw ConfigError("loss epsilon must be positive");
  const double log_eps = std::log(config.epsilon);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) s -= neg_log_prob(logits(i, j), targets(i, j));
    acc -= log_plus_eps(s, log_eps);
  }
  return acc / static_cast<double>(logits.rows());
}

double total_loss(const Matrix& logits, const BitMatrix& targets, const LossConfig& config) {
  return bce_loss(logits, targets) + block_loss(logits, targets, config);
}

Matrix bce_loss_gradient(const Matrix& logits, const BitMatrix& targets) {
  check_shapes(logits, targets);
  Matrix g(logits.rows(), logits.cols());
  const double inv = logits.size() ? 1.0 / static_cast<double>(logits.size()) : 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    g.data()[i] = (sigmoid(logits.data()[i]) - static_cast<double>(targets.data()[i])) * inv;
  return g;
}

Matrix block_loss_gradient(const Matrix& logits, const BitMatrix& targets, const LossConfig& config) {
  check_shapes(logits, targets);
  const double log_eps = std::log(config.epsilon);
  const double inv_b = 1.0 / static_cast<double>(logits.rows());
  Matrix g(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) s -= neg_log_prob(logits(i, j), targets(i, j));
    const double w = sigmoid(s - log_eps);  // exp(s) / (exp(s) + eps)
    for (Eigen::Index j = 0; j < logits.cols(); ++j)
      g(i, j) = -inv_b * w * (static_cast<double>(targets(i, j)) - sigmoid(logits(i, j)));
  }
  return g;
}

namespace ad {

Var bce_loss(Var logits, const BitMatrix& targets) {
  Tape& t = logits.tape();
  Matrix out(1, 1);
  out(0, 0) = dpp::bce_loss(logits.value(), targets);
  return t.record(std::move(out), t.any_needs_grad({logits}), [logits, targets](const Matrix& g) {
    logits.tape().accumulate_expr(logits, g(0, 0) * dpp::bce_loss_gradient(logits.value(), targets));
  });
}

Var block_loss(Var logits, const BitMatrix& targets, const LossConfig& config) {
  Tape& t = logits.tape();
  Matrix out(1, 1);
  out(0, 0) = dpp::block_loss(logits.value(), targets, config);
  return t.record(std::move(out), t.any_needs_grad({logits}), [logits, targets, config](const Matrix& g) {
    logits.tape().accumulate_expr(logits,
                                  g(0, 0) * dpp::block_loss_gradient(logits.value(), targets, config));
  });
}

Var total_loss(Var logits, const BitMatrix& targets, const LossConfig& config) {
  return add(bce_loss(logits, targets), block_loss(logits, targets, config));
}

}  // namespace ad

}  // namespace dpp
