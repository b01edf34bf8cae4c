#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "deeppolar/codec.hpp"
#include "deeppolar/crc.hpp"
#include "deeppolar/trainer.hpp"

namespace dpp {

struct EnsembleMember {
  std::string label;
  SnrPair snr_pair{};
  std::shared_ptr<const NeuralCode> model;
};

/// Ordered decoder ensemble. CRC bits are carved out of the k information
/// positions, so every member sees the same (n, k) code and the payload is
/// k - r bits. Transmission always uses the fallback member's encoder.
struct EnsembleSpec {
  std::vector<EnsembleMember> models;
  int fallback_index = 0;  // 0-based
  CrcSpec crc = CrcSpec::preset("crc3");

  int payload_len() const;
  const NeuralCode& fallback() const { return *models.at(static_cast<std::size_t>(fallback_index)).model; }
  void validate() const;
};

struct SmartChoice {
  int selected = 0;  // index into the ensemble
  bool used_fallback = false;
  std::vector<std::uint8_t> crc_ok;  // one per member, ensemble order
};

/// Scans candidates (each length k, payload then check bits) in order and
/// picks the first whose CRC verifies, else the fallback.
SmartChoice smart_select(std::span<const BitVector> candidates, int fallback_index, const CrcSpec& crc);

/// Payload (B x (k - r)) -> encoder input (B x k) with check bits appended.
BitMatrix smart_message(const BitMatrix& payload, const CrcSpec& crc);
Matrix smart_encode(const BitMatrix& payload, const EnsembleSpec& spec);

struct SmartDecodeResult {
  BitMatrix payload;
  std::vector<SmartChoice> choices;  // one per row
};

/// Decodes received blocks with every member, then selects per row.
SmartDecodeResult smart_decode(const Matrix& received, double sigma, const EnsembleSpec& spec);

class SmartCodec final : public Codec {
 public:
  explicit SmartCodec(EnsembleSpec spec, std::string id = "smart");
  std::string id() const override { return id_; }
  int payload_bits() const override { return spec_.payload_len(); }
  int block_length() const override { return spec_.fallback().code.n(); }
  Matrix encode(const BitMatrix& payload) const override;
  BitMatrix decode(const Matrix& received, double sigma) const override;
  const EnsembleSpec& spec() const { return spec_; }

 private:
  EnsembleSpec spec_;
  std::string id_;
};

/// Neural codec over the same code that only strips CRC bits: the fallback
/// decoder alone, for BLER comparisons against the ensemble.
class CrcStrippedCodec final : public Codec {
 public:
  CrcStrippedCodec(std::shared_ptr<const NeuralCode> model, CrcSpec crc, std::string id);
  std::string id() const override { return id_; }
  int payload_bits() const override { return model_->code.k() - crc_.r(); }
  int block_length() const override { return model_->code.n(); }
  Matrix encode(const BitMatrix& payload) const override;
  BitMatrix decode(const Matrix& received, double sigma) const override;

 private:
  std::shared_ptr<const NeuralCode> model_;
  CrcSpec crc_;
  std::string id_;
};

/// The default ensemble training pairs, fallback first.
std::vector<SnrPair> default_smart_pairs();

}  // namespace dpp
