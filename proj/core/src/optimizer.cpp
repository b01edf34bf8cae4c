#include "deeppolar/optimizer.hpp"

#include <cmath>

namespace dpp {

Adam::Adam(ad::ParameterList params, AdamConfig config) : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const ad::Parameter* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::zero_grad() {
  for (ad::Parameter* p : params_) p->zero_grad();
}

void Adam::step(double learning_rate) {
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ad::Parameter& p = *params_[i];
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) continue;
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * p.grad;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= learning_rate * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.eps);
  }
}

void Adam::restore(long long steps, std::vector<Matrix> first, std::vector<Matrix> second) {
  if (first.size() != params_.size() || second.size() != params_.size())
    throw FormatError("optimizer state does not match the parameter list");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& v = params_[i]->value;
    if (first[i].rows() != v.rows() || first[i].cols() != v.cols() || second[i].rows() != v.rows() ||
        second[i].cols() != v.cols())
      throw FormatError("optimizer moment shape mismatch for " + params_[i]->name);
  }
  steps_ = steps;
  m_ = std::move(first);
  v_ = std::move(second);
}

}  // namespace dpp
