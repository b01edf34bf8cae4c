#pragma once

#include <memory>
#include <string>

#include "deeppolar/model.hpp"
#include "deeppolar/polar.hpp"

namespace dpp {

/// Anything the Monte-Carlo harness can push through an AWGN channel.
/// encode() returns unit-power real symbols; decode() sees the raw channel
/// output and the noise standard deviation.
class Codec {
 public:
  virtual ~Codec() = default;
  virtual std::string id() const = 0;
  virtual int payload_bits() const = 0;
  virtual int block_length() const = 0;
  virtual Matrix encode(const BitMatrix& payload) const = 0;
  virtual BitMatrix decode(const Matrix& received, double sigma) const = 0;
};

/// BPSK without coding; one symbol per bit.
class UncodedCodec final : public Codec {
 public:
  explicit UncodedCodec(int bits);
  std::string id() const override { return "uncoded"; }
  int payload_bits() const override { return bits_; }
  int block_length() const override { return bits_; }
  Matrix encode(const BitMatrix& payload) const override;
  BitMatrix decode(const Matrix& received, double sigma) const override;

 private:
  int bits_;
};

/// Classical polar code with successive-cancellation decoding.
class PolarScCodec final : public Codec {
 public:
  explicit PolarScCodec(CodeConfig code, CheckNodeRule rule = CheckNodeRule::Exact);
  std::string id() const override { return "sc"; }
  int payload_bits() const override { return code_.k(); }
  int block_length() const override { return code_.n(); }
  Matrix encode(const BitMatrix& payload) const override;
  BitMatrix decode(const Matrix& received, double sigma) const override;
  const CodeConfig& code() const { return code_; }

 private:
  CodeConfig code_;
  CheckNodeRule rule_;
};

/// Trained neural encoder/decoder; the model must be calibrated.
class NeuralCodec final : public Codec {
 public:
  NeuralCodec(std::shared_ptr<const NeuralCode> model, std::string id);
  std::string id() const override { return id_; }
  int payload_bits() const override { return model_->code.k(); }
  int block_length() const override { return model_->code.n(); }
  Matrix encode(const BitMatrix& payload) const override;
  BitMatrix decode(const Matrix& received, double sigma) const override;
  const NeuralCode& model() const { return *model_; }

 private:
  std::shared_ptr<const NeuralCode> model_;
  std::string id_;
};

}  // namespace dpp
