#pragma once

namespace dpp {

/// Cosine annealing with warm restarts. Period i spans T_i + 1 steps
/// (t = 0 .. T_i inclusive), so the minimum rate is reached exactly at
/// t = T_i and the next step restarts at the maximum; T_{i+1} = T_i * t_mult.
struct CosineWarmRestarts {
  double max_rate = 1e-3;
  double min_rate = 1e-5;
  int t0 = 50;
  int t_mult = 2;

  void validate() const;
  double rate(long long step) const;
  /// Position inside the current period: (period start step, period length T_i).
  void locate(long long step, long long& period_start, long long& period_length) const;
};

}  // namespace dpp
