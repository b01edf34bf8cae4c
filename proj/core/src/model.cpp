#include "deeppolar/model.hpp"

namespace dpp {

NeuralCode NeuralCode::create(const CodeConfig& code, const ModelConfig& model, std::uint64_t seed) {
  Rng enc_rng = make_rng(seed, {0x656e63});
  Rng dec_rng = make_rng(seed, {0x646563});
  return NeuralCode{code, model, EncoderTree(code, model, enc_rng), DecoderTree(code, model, dec_rng), {}, false};
}

void NeuralCode::set_code(const CodeConfig& next) {
  encoder.rebind(next);
  decoder.rebind(next);
  code = next;
  calibrated = false;
}

void NeuralCode::calibrate(std::uint64_t seed, int batch) {
  if (batch < 2) throw ConfigError("calibration batch needs at least two messages");
  Rng rng = make_rng(seed, {0x63616c});
  const BitMatrix messages = random_bits(rng, batch, code.k());
  ad::Tape tape(false);
  norm = PowerNormalizer::fit(encoder.forward(tape, messages).value());
  calibrated = true;
}

Matrix NeuralCode::encode(const BitMatrix& messages) const {
  if (!calibrated) throw ConfigError("encode: power normalization has not been calibrated");
  return encode_tree(messages, encoder, norm);
}

DecodeResult NeuralCode::decode(const Matrix& llr) const { return decode_tree(llr, decoder, encoder); }

}  // namespace dpp
