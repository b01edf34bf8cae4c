#pragma once

#include "deeppolar/common.hpp"
#include "deeppolar/rng.hpp"

namespace dpp {

// SNR is 1/sigma^2 with unit signal power per real dimension (not Eb/N0).
double snr_db_to_sigma(double snr_db);
double sigma_to_snr_db(double sigma);

struct ChannelConfig {
  double snr_db = 0.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;

  static ChannelConfig from_snr(double snr_db, std::uint64_t seed = 0);
};

/// Affine map x -> (x - mean) / scale fitted so a batch has zero mean and
/// unit average power. Fitted once on a calibration batch and then frozen for
/// inference, or refitted per batch during training.
struct PowerNormalizer {
  double mean = 0.0;
  double scale = 1.0;

  static PowerNormalizer fit(const Matrix& codewords);
  Matrix apply(const Matrix& codewords) const;
};

/// Per-batch normalization. Throws DomainError for a zero-variance batch.
Matrix normalize_power(const Matrix& codewords, PowerNormalizer* fitted = nullptr);

/// Bit 0 -> +1, bit 1 -> -1.
Matrix bpsk(const BitMatrix& bits);

Matrix awgn(const Matrix& x, double sigma, Rng& rng);
/// Deterministic for a fixed config.seed.
Matrix awgn(const Matrix& x, const ChannelConfig& config);

/// L = 2y / sigma^2; positive favours bit 0.
Matrix llr_from_channel(const Matrix& y, double sigma);

}  // namespace dpp
