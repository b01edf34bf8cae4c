#pragma once

#include "deeppolar/channel.hpp"
#include "deeppolar/neural_coder.hpp"

namespace dpp {

/// An encoder/decoder pair over one code, plus the inference-time power
/// normalization constants.
struct NeuralCode {
  CodeConfig code;
  ModelConfig model;
  EncoderTree encoder;
  DecoderTree decoder;
  PowerNormalizer norm;
  bool calibrated = false;

  static NeuralCode create(const CodeConfig& code, const ModelConfig& model, std::uint64_t seed);

  /// Replaces the information set (same n and ell); weights are kept.
  void set_code(const CodeConfig& next);

  /// Freezes power-normalization constants from a batch of random messages.
  void calibrate(std::uint64_t seed, int batch = 20000);

  /// Unit-power codewords using the frozen constants (calibrate() first).
  Matrix encode(const BitMatrix& messages) const;
  /// Decision-feedback decoding of channel LLRs.
  DecodeResult decode(const Matrix& llr) const;
};

}  // namespace dpp
