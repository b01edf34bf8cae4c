#include "deeppolar/smart.hpp"

namespace dpp {

int EnsembleSpec::payload_len() const {
  if (models.empty() || !models.front().model) return 0;
  return models.front().model->code.k() - crc.r();
}

void EnsembleSpec::validate() const {
  if (models.empty()) throw ConfigError("ensemble needs at least one model");
  if (fallback_index < 0 || fallback_index >= static_cast<int>(models.size()))
    throw ConfigError("ensemble fallback index " + std::to_string(fallback_index) + " is out of range");
  for (const EnsembleMember& m : models) {
    if (!m.model) throw ConfigError("ensemble member '" + m.label + "' has no model");
    if (!(m.model->code == models.front().model->code))
      throw ConfigError("ensemble member '" + m.label + "' uses a different code configuration");
  }
  if (!fallback().calibrated) throw ConfigError("ensemble fallback model has no power calibration");
  if (payload_len() < 1) throw ConfigError("CRC leaves no payload bits (k <= r)");
}

SmartChoice smart_select(std::span<const BitVector> candidates, int fallback_index, const CrcSpec& crc) {
  if (fallback_index < 0 || fallback_index >= static_cast<int>(candidates.size()))
    throw ConfigError("fallback index is out of range for the candidate set");
  SmartChoice c;
  c.crc_ok.reserve(candidates.size());
  int first = -1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const BitVector& v = candidates[i];
    const bool ok = crc_verify(std::span<const std::uint8_t>(v.data(), static_cast<std::size_t>(v.size())), crc);
    c.crc_ok.push_back(ok);
    if (ok && first < 0) first = static_cast<int>(i);
  }
  c.used_fallback = first < 0;
  c.selected = c.used_fallback ? fallback_index : first;
  return c;
}

BitMatrix smart_message(const BitMatrix& payload, const CrcSpec& crc) {
  BitMatrix out(payload.rows(), payload.cols() + crc.r());
  std::vector<std::uint8_t> row(static_cast<std::size_t>(payload.cols()));
  for (Eigen::Index r = 0; r < payload.rows(); ++r) {
    for (Eigen::Index c = 0; c < payload.cols(); ++c) row[static_cast<std::size_t>(c)] = payload(r, c);
    const std::vector<std::uint8_t> word = crc_append(row, crc);
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = word[static_cast<std::size_t>(c)];
  }
  return out;
}

Matrix smart_encode(const BitMatrix& payload, const EnsembleSpec& spec) {
  spec.validate();
  if (payload.cols() != spec.payload_len())
    throw ConfigError("SMART payload has " + std::to_string(payload.cols()) + " bits, expected " +
                      std::to_string(spec.payload_len()));
  return spec.fallback().encode(smart_message(payload, spec.crc));
}

SmartDecodeResult smart_decode(const Matrix& received, double sigma, const EnsembleSpec& spec) {
  spec.validate();
  if (!received.allFinite()) throw DomainError("SMART input contains NaN or Inf");
  const NeuralCode& shared = spec.fallback();
  const Matrix llr = llr_from_channel(received, sigma);
  std::vector<BitMatrix> decoded;
  decoded.reserve(spec.models.size());
  for (const EnsembleMember& m : spec.models) decoded.push_back(decode_tree(llr, m.model->decoder, shared.encoder).bits);

  const int k = shared.code.k();
  const int payload = spec.payload_len();
  SmartDecodeResult out;
  out.payload.resize(received.rows(), payload);
  out.choices.reserve(static_cast<std::size_t>(received.rows()));
  std::vector<BitVector> candidates(spec.models.size(), BitVector(k));
  for (Eigen::Index r = 0; r < received.rows(); ++r) {
    for (std::size_t i = 0; i < decoded.size(); ++i) candidates[i] = decoded[i].row(r).transpose();
    SmartChoice c = smart_select(candidates, spec.fallback_index, spec.crc);
    out.payload.row(r) = decoded[static_cast<std::size_t>(c.selected)].row(r).head(payload);
    out.choices.push_back(std::move(c));
  }
  return out;
}

SmartCodec::SmartCodec(EnsembleSpec spec, std::string id) : spec_(std::move(spec)), id_(std::move(id)) {
  spec_.validate();
}

Matrix SmartCodec::encode(const BitMatrix& payload) const { return smart_encode(payload, spec_); }

BitMatrix SmartCodec::decode(const Matrix& received, double sigma) const {
  return smart_decode(received, sigma, spec_).payload;
}

CrcStrippedCodec::CrcStrippedCodec(std::shared_ptr<const NeuralCode> model, CrcSpec crc, std::string id)
    : model_(std::move(model)), crc_(std::move(crc)), id_(std::move(id)) {
  if (!model_ || !model_->calibrated) throw ConfigError("CRC codec needs a calibrated model");
  if (payload_bits() < 1) throw ConfigError("CRC leaves no payload bits (k <= r)");
}

Matrix CrcStrippedCodec::encode(const BitMatrix& payload) const {
  if (payload.cols() != payload_bits()) throw ConfigError("payload length does not match k - r");
  return model_->encode(smart_message(payload, crc_));
}

BitMatrix CrcStrippedCodec::decode(const Matrix& received, double sigma) const {
  return model_->decode(llr_from_channel(received, sigma)).bits.leftCols(payload_bits());
}

std::vector<SnrPair> default_smart_pairs() { return {{0, -2}, {-1, -3}, {-3, -5}, {1, -1}, {-2, -4}}; }

}  // namespace dpp
