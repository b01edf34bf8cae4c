#pragma once

#include <string>
#include <vector>

#include "deeppolar/tape.hpp"

namespace dpp {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over a fixed parameter list. Moments are keyed by position in the
/// list; names are kept for checkpointing.
class Adam {
 public:
  Adam() = default;
  explicit Adam(ad::ParameterList params, AdamConfig config = {});

  void zero_grad();
  void step(double learning_rate);

  long long steps() const { return steps_; }
  const ad::ParameterList& parameters() const { return params_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }
  /// Restores moments and step count (shapes must match the parameter list).
  void restore(long long steps, std::vector<Matrix> first, std::vector<Matrix> second);

 private:
  ad::ParameterList params_;
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long long steps_ = 0;
};

}  // namespace dpp
