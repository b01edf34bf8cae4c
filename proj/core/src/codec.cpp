#include "deeppolar/codec.hpp"

namespace dpp {

namespace {

void check_payload(const BitMatrix& payload, int bits) {
  if (payload.cols() != bits)
    throw ConfigError("payload has " + std::to_string(payload.cols()) + " bits, codec expects " +
                      std::to_string(bits));
}

void check_received(const Matrix& received, int n) {
  if (received.cols() != n)
    throw ConfigError("received block has " + std::to_string(received.cols()) + " symbols, codec expects " +
                      std::to_string(n));
}

}  // namespace

UncodedCodec::UncodedCodec(int bits) : bits_(bits) {
  if (bits < 1) throw ConfigError("uncoded codec needs at least one bit");
}

Matrix UncodedCodec::encode(const BitMatrix& payload) const {
  check_payload(payload, bits_);
  return bpsk(payload);
}

BitMatrix UncodedCodec::decode(const Matrix& received, double) const {
  check_received(received, bits_);
  return (received.array() < 0.0).cast<std::uint8_t>();
}

PolarScCodec::PolarScCodec(CodeConfig code, CheckNodeRule rule) : code_(std::move(code)), rule_(rule) {}

Matrix PolarScCodec::encode(const BitMatrix& payload) const {
  check_payload(payload, code_.k());
  return bpsk(polar_transform(code_.embed(payload)));
}

BitMatrix PolarScCodec::decode(const Matrix& received, double sigma) const {
  check_received(received, code_.n());
  const Matrix llr = llr_from_channel(received, sigma);
  BitMatrix out(received.rows(), code_.k());
  for (Eigen::Index r = 0; r < llr.rows(); ++r) {
    const BitVector bits = sc_decode(std::span<const double>(llr.row(r).data(), static_cast<std::size_t>(llr.cols())),
                                     code_, rule_);
    out.row(r) = bits.transpose();
  }
  return out;
}

NeuralCodec::NeuralCodec(std::shared_ptr<const NeuralCode> model, std::string id)
    : model_(std::move(model)), id_(std::move(id)) {
  if (!model_) throw ConfigError("neural codec needs a model");
  if (!model_->calibrated) throw ConfigError("neural codec model '" + id_ + "' has no power calibration");
}

Matrix NeuralCodec::encode(const BitMatrix& payload) const {
  check_payload(payload, model_->code.k());
  return model_->encode(payload);
}

BitMatrix NeuralCodec::decode(const Matrix& received, double sigma) const {
  check_received(received, model_->code.n());
  return model_->decode(llr_from_channel(received, sigma)).bits;
}

}  // namespace dpp
