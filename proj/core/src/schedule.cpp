#include "deeppolar/schedule.hpp"

#include <cmath>
#include <numbers>

#include "deeppolar/common.hpp"

namespace dpp {

void CosineWarmRestarts::validate() const {
  if (!(max_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (min_rate < 0.0 || min_rate > max_rate) throw ConfigError("minimum learning rate must lie in [0, max]");
  if (t0 < 1) throw ConfigError("scheduler period T0 must be >= 1");
  if (t_mult < 1) throw ConfigError("scheduler multiplier Tmult must be >= 1");
}

void CosineWarmRestarts::locate(long long step, long long& period_start, long long& period_length) const {
  period_start = 0;
  period_length = t0;
  while (step > period_start + period_length) {
    period_start += period_length + 1;
    period_length *= t_mult;
  }
}

double CosineWarmRestarts::rate(long long step) const {
  if (step < 0) step = 0;
  long long start = 0;
  long long length = 0;
  locate(step, start, length);
  const double t = static_cast<double>(step - start) / static_cast<double>(length);
  return min_rate + 0.5 * (max_rate - min_rate) * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace dpp
