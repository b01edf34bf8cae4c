#include "deeppolar/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace dpp {

bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

int tree_depth(int n, int ell) {
  if (n < 1 || ell < 2) return -1;
  int depth = 0;
  long long size = 1;
  while (size < n) {
    size *= ell;
    ++depth;
  }
  return size == n ? depth : -1;
}

CodeConfig::CodeConfig(int n, int k, int ell, std::vector<int> info_set)
    : n_(n), k_(k), ell_(ell), info_set_(std::move(info_set)) {
  if (!is_power_of_two(ell) || ell < 2)
    throw ConfigError("kernel size ell=" + std::to_string(ell) + " must be a power of two >= 2");
  depth_ = tree_depth(n, ell);
  if (depth_ < 1)
    throw ConfigError("block length n=" + std::to_string(n) + " is not a positive power of ell=" +
                      std::to_string(ell));
  if (k < 0 || k > n)
    throw ConfigError("message length k=" + std::to_string(k) + " outside [0, n]");
  if (static_cast<int>(info_set_.size()) != k)
    throw ConfigError("information set has " + std::to_string(info_set_.size()) +
                      " entries, expected k=" + std::to_string(k));
  std::sort(info_set_.begin(), info_set_.end());
  frozen_mask_.assign(static_cast<std::size_t>(n), 1);
  for (std::size_t i = 0; i < info_set_.size(); ++i) {
    const int idx = info_set_[i];
    if (idx < 0 || idx >= n) throw ConfigError("information index out of range");
    if (i > 0 && info_set_[i - 1] == idx) throw ConfigError("duplicate information index");
    frozen_mask_[static_cast<std::size_t>(idx)] = 0;
  }
  for (int i = 0; i < n; ++i)
    if (frozen_mask_[static_cast<std::size_t>(i)]) frozen_set_.push_back(i);
}

BitMatrix CodeConfig::embed(const BitMatrix& messages) const {
  if (messages.cols() != k_) throw ConfigError("message width does not match k");
  BitMatrix full = BitMatrix::Zero(messages.rows(), n_);
  for (int j = 0; j < k_; ++j) full.col(info_set_[static_cast<std::size_t>(j)]) = messages.col(j);
  return full;
}

BitMatrix CodeConfig::extract(const BitMatrix& full) const {
  if (full.cols() != n_) throw ConfigError("vector width does not match n");
  BitMatrix out(full.rows(), k_);
  for (int j = 0; j < k_; ++j) out.col(j) = full.col(info_set_[static_cast<std::size_t>(j)]);
  return out;
}

double ga_phi(double mean) { return std::exp(ga_log_phi(mean)); }

double ga_log_phi(double mean) {
  if (mean <= 0.0) return 0.0;
  if (mean < 10.0) return std::min(0.0, -0.4527 * std::pow(mean, 0.86) + 0.0218);
  return 0.5 * std::log(std::numbers::pi / mean) - mean / 4.0 + std::log1p(-10.0 / (7.0 * mean));
}

double ga_phi_inverse_from_log(double log_value) {
  if (log_value >= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (ga_log_phi(hi) > log_value) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ga_log_phi(mid) > log_value)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

void ga_recurse(int size, double mean, std::vector<double>& out) {
  if (size == 1) {
    out.push_back(mean);
    return;
  }
  // First half sees the check-node (worse) combination, second half the variable node.
  const double log_phi = ga_log_phi(mean);
  const double phi = std::exp(log_phi);
  const double worse = ga_phi_inverse_from_log(log_phi + std::log(2.0 - phi));
  ga_recurse(size / 2, worse, out);
  ga_recurse(size / 2, 2.0 * mean, out);
}

}  // namespace

std::vector<double> ga_channel_means(int n, double design_snr_db) {
  if (!is_power_of_two(n)) throw ConfigError("density evolution needs a power-of-two length");
  const double inv_var = std::pow(10.0, design_snr_db / 10.0);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(n));
  ga_recurse(n, 2.0 * inv_var, means);
  return means;
}

CodeConfig build_info_set(int n, int k, int ell, double design_snr_db) {
  if (k < 0 || k > n) throw ConfigError("message length k outside [0, n]");
  if (!is_power_of_two(ell) || tree_depth(n, ell) < 1)
    throw ConfigError("invalid (n, ell) combination: n=" + std::to_string(n) +
                      " ell=" + std::to_string(ell));
  const std::vector<double> means = ga_channel_means(n, design_snr_db);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = means[static_cast<std::size_t>(a)];
    const double mb = means[static_cast<std::size_t>(b)];
    if (ma != mb) return ma > mb;
    return a > b;
  });
  order.resize(static_cast<std::size_t>(k));
  return CodeConfig(n, k, ell, std::move(order));
}

BitMatrix polar_matrix(int size) {
  if (!is_power_of_two(size)) throw ConfigError("polar matrix size must be a power of two");
  BitMatrix g(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) g(i, j) = (j & ~i) == 0 ? 1 : 0;
  return g;
}

BitMatrix polar_transform(const BitMatrix& u) {
  const auto n = static_cast<int>(u.cols());
  if (!is_power_of_two(n)) throw ConfigError("polar transform length must be a power of two");
  if ((u.array() > 1).any()) throw DomainError("polar transform input must be binary");
  BitMatrix x = u;
  for (int h = 1; h < n; h *= 2)
    for (int base = 0; base < n; base += 2 * h)
      for (int j = base; j < base + h; ++j)
        for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, j) ^= x(r, j + h);
  return x;
}

BitVector polar_transform(const BitVector& u) {
  BitMatrix row = u.transpose();
  return polar_transform(row).transpose();
}

double boxplus(double a, double b, CheckNodeRule rule) {
  const double sign = ((a < 0) != (b < 0)) ? -1.0 : 1.0;
  const double mag = std::min(std::abs(a), std::abs(b));
  if (rule == CheckNodeRule::MinSum) return sign * mag;
  return sign * mag + std::log1p(std::exp(-std::abs(a + b))) - std::log1p(std::exp(-std::abs(a - b)));
}

namespace {

struct ScDecoder {
  const std::vector<std::uint8_t>& frozen;
  CheckNodeRule rule;
  std::vector<std::uint8_t> u;

  // Decodes the sub-block of message positions [offset, offset + llr.size()) and
  // returns its re-encoded codeword bits.
  std::vector<std::uint8_t> run(const std::vector<double>& llr, int offset) {
    const auto n = llr.size();
    if (n == 1) {
      const auto i = static_cast<std::size_t>(offset);
      const std::uint8_t bit = frozen[i] ? 0 : (llr[0] < 0.0 ? 1 : 0);
      u[i] = bit;
      return {bit};
    }
    const std::size_t half = n / 2;
    std::vector<double> child(half);
    for (std::size_t i = 0; i < half; ++i) child[i] = boxplus(llr[i], llr[i + half], rule);
    const std::vector<std::uint8_t> xa = run(child, offset);
    for (std::size_t i = 0; i < half; ++i)
      child[i] = llr[i + half] + (xa[i] ? -llr[i] : llr[i]);
    const std::vector<std::uint8_t> xb = run(child, offset + static_cast<int>(half));
    std::vector<std::uint8_t> x(n);
    for (std::size_t i = 0; i < half; ++i) {
      x[i] = xa[i] ^ xb[i];
      x[i + half] = xb[i];
    }
    return x;
  }
};

}  // namespace

BitVector sc_decode(std::span<const double> llr, const CodeConfig& config, CheckNodeRule rule) {
  if (static_cast<int>(llr.size()) != config.n()) throw ConfigError("LLR length does not match n");
  if (!is_power_of_two(config.n())) throw ConfigError("SC decoding needs a power-of-two length");
  for (double v : llr)
    if (!std::isfinite(v)) throw DomainError("LLR contains NaN or Inf");
  ScDecoder dec{config.frozen_mask(), rule, std::vector<std::uint8_t>(llr.size(), 0)};
  dec.run(std::vector<double>(llr.begin(), llr.end()), 0);
  BitVector out(config.k());
  for (int j = 0; j < config.k(); ++j)
    out(j) = dec.u[static_cast<std::size_t>(config.info_set()[static_cast<std::size_t>(j)])];
  return out;
}

}  // namespace dpp
