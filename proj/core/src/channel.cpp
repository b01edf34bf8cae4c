#include "deeppolar/channel.hpp"

#include <cmath>

namespace dpp {

double snr_db_to_sigma(double snr_db) { return std::pow(10.0, -snr_db / 20.0); }

double sigma_to_snr_db(double sigma) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  return -20.0 * std::log10(sigma);
}

ChannelConfig ChannelConfig::from_snr(double snr_db, std::uint64_t seed) {
  return ChannelConfig{snr_db, snr_db_to_sigma(snr_db), seed};
}

PowerNormalizer PowerNormalizer::fit(const Matrix& codewords) {
  if (codewords.size() == 0) throw DomainError("cannot normalize an empty batch");
  const double mean = codewords.mean();
  const double power = (codewords.array() - mean).square().mean();
  if (!(power > 1e-300) || !std::isfinite(power))
    throw DomainError("degenerate batch: zero variance, power normalization undefined");
  return PowerNormalizer{mean, std::sqrt(power)};
}

Matrix PowerNormalizer::apply(const Matrix& codewords) const {
  return ((codewords.array() - mean) / scale).matrix();
}

Matrix normalize_power(const Matrix& codewords, PowerNormalizer* fitted) {
  const PowerNormalizer norm = PowerNormalizer::fit(codewords);
  if (fitted) *fitted = norm;
  return norm.apply(codewords);
}

Matrix bpsk(const BitMatrix& bits) {
  return (1.0 - 2.0 * bits.cast<double>().array()).matrix();
}

Matrix awgn(const Matrix& x, double sigma, Rng& rng) {
  if (sigma == 0.0) return x;
  return x + gaussian_matrix(rng, x.rows(), x.cols(), sigma);
}

Matrix awgn(const Matrix& x, const ChannelConfig& config) {
  Rng rng = make_rng(config.seed, {0xa3c1});
  return awgn(x, config.sigma, rng);
}

Matrix llr_from_channel(const Matrix& y, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive for LLR formation");
  return (2.0 / (sigma * sigma)) * y;
}

}  // namespace dpp
