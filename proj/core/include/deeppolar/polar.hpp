#pragma once

#include <span>
#include <vector>

#include "deeppolar/common.hpp"

namespace dpp {

/// Block length, message length and ell-ary tree shape of a (neural) polar
/// code, plus the information/frozen split. Indices are natural
/// (non-bit-reversed) throughout: message position i is decoded i-th by SC.
class CodeConfig {
 public:
  CodeConfig() = default;

  /// Validates every invariant; throws ConfigError on violation.
  /// info_set may be given in any order; it is stored sorted.
  CodeConfig(int n, int k, int ell, std::vector<int> info_set);

  int n() const { return n_; }
  int k() const { return k_; }
  int ell() const { return ell_; }
  int depth() const { return depth_; }
  const std::vector<int>& info_set() const { return info_set_; }
  const std::vector<int>& frozen_set() const { return frozen_set_; }
  bool is_frozen(int i) const { return frozen_mask_[static_cast<std::size_t>(i)] != 0; }
  const std::vector<std::uint8_t>& frozen_mask() const { return frozen_mask_; }

  // Scatter k message bits (per row) into length-n vectors, frozen = 0.
  BitMatrix embed(const BitMatrix& messages) const;
  // Gather the info positions back out.
  BitMatrix extract(const BitMatrix& full) const;

  friend bool operator==(const CodeConfig&, const CodeConfig&) = default;

 private:
  int n_ = 1;
  int k_ = 0;
  int ell_ = 2;
  int depth_ = 0;
  std::vector<int> info_set_;
  std::vector<int> frozen_set_;
  std::vector<std::uint8_t> frozen_mask_;
};

// Returns depth with ell^depth == n, or -1.
int tree_depth(int n, int ell);

bool is_power_of_two(int x);

/// Gaussian-approximation density evolution for BPSK/AWGN under SNR = 1/sigma^2.
/// Returns the mean LLR of each synthetic channel in natural index order,
/// in the log-domain-safe form used for ranking (larger = more reliable).
std::vector<double> ga_channel_means(int n, double design_snr_db);

/// Picks the k most reliable synthetic channels (ties -> larger index).
CodeConfig build_info_set(int n, int k, int ell, double design_snr_db = -2.0);

// Chung's phi function and its log, used by density evolution.
double ga_phi(double mean);
double ga_log_phi(double mean);
double ga_phi_inverse_from_log(double log_value);

/// (log2 size)-fold Kronecker power of F = [[1,0],[1,1]].
BitMatrix polar_matrix(int size);

/// x = u * G_n over GF(2). Throws DomainError on non-binary entries.
BitVector polar_transform(const BitVector& u);
/// Row-wise transform of a batch.
BitMatrix polar_transform(const BitMatrix& u);

enum class CheckNodeRule { Exact, MinSum };

double boxplus(double a, double b, CheckNodeRule rule = CheckNodeRule::Exact);

/// Successive-cancellation decoding; positive LLR favours bit 0.
/// Returns the k information bits. Throws DomainError on NaN/Inf.
BitVector sc_decode(std::span<const double> llr, const CodeConfig& config,
                    CheckNodeRule rule = CheckNodeRule::Exact);

}  // namespace dpp
