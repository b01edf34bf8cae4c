#include <gtest/gtest.h>

#include "deeppolar/codec.hpp"
#include "deeppolar/harness.hpp"
#include "deeppolar/smart.hpp"
#include "test_util.hpp"

using namespace dpp;

namespace {

ModelConfig tiny_model() {
  ModelConfig m;
  m.enc_hidden = 8;
  m.dec_hidden = 8;
  m.heads = 2;
  m.head_dim = 4;
  m.dec_layers = 2;
  m.dropout = 0.0;
  return m;
}

BitVector with_crc(std::vector<std::uint8_t> payload, const CrcSpec& crc, bool corrupt) {
  auto word = crc_append(payload, crc);
  if (corrupt) word.back() ^= 1;
  BitVector v(static_cast<Eigen::Index>(word.size()));
  for (std::size_t i = 0; i < word.size(); ++i) v(static_cast<Eigen::Index>(i)) = word[i];
  return v;
}

std::shared_ptr<const NeuralCode> calibrated_model(int k, std::uint64_t seed) {
  auto m = std::make_shared<NeuralCode>(NeuralCode::create(build_info_set(16, k, 4), tiny_model(), seed));
  m->calibrate(seed, 500);
  return m;
}

}  // namespace

TEST(SmartSelect, FallbackWhenEveryCrcFails) {
  const CrcSpec crc = CrcSpec::preset("crc3");
  const std::vector<BitVector> c{with_crc({1, 0, 1, 1}, crc, true), with_crc({0, 0, 1, 1}, crc, true),
                                 with_crc({1, 1, 1, 1}, crc, true)};
  const SmartChoice s = smart_select(c, 1, crc);
  EXPECT_EQ(s.selected, 1);
  EXPECT_TRUE(s.used_fallback);
  EXPECT_EQ(s.crc_ok, (std::vector<std::uint8_t>{0, 0, 0}));
}

TEST(SmartSelect, FirstValidCrcInEnsembleOrder) {
  const CrcSpec crc = CrcSpec::preset("crc8");
  const std::vector<BitVector> c{with_crc({1, 0, 1}, crc, true), with_crc({0, 1, 1}, crc, false),
                                 with_crc({1, 1, 0}, crc, false)};
  const SmartChoice s = smart_select(c, 0, crc);
  EXPECT_EQ(s.selected, 1);
  EXPECT_FALSE(s.used_fallback);
  EXPECT_EQ(s.crc_ok, (std::vector<std::uint8_t>{0, 1, 1}));
}

TEST(SmartSelect, ExhaustiveOverValidityPatterns) {
  // Every pass/fail pattern over four members and every fallback index.
  const CrcSpec crc = CrcSpec::preset("crc3");
  for (int pattern = 0; pattern < 16; ++pattern)
    for (int fb = 0; fb < 4; ++fb) {
      std::vector<BitVector> c;
      for (int i = 0; i < 4; ++i) c.push_back(with_crc({static_cast<std::uint8_t>(i & 1), 1, 0}, crc, !((pattern >> i) & 1)));
      const SmartChoice s = smart_select(c, fb, crc);
      int expected = fb;
      for (int i = 3; i >= 0; --i)
        if ((pattern >> i) & 1) expected = i;
      ASSERT_EQ(s.selected, expected) << pattern << "/" << fb;
      ASSERT_EQ(s.used_fallback, pattern == 0);
    }
}

TEST(SmartSelect, RejectsBadInput) {
  const CrcSpec crc = CrcSpec::preset("crc3");
  EXPECT_THROW(smart_select({}, 0, crc), ConfigError);
  const std::vector<BitVector> c{with_crc({1, 0}, crc, false)};
  EXPECT_THROW(smart_select(c, 1, crc), ConfigError);
}

TEST(SmartMessage, AppendsCheckBitsPerRow) {
  const CrcSpec crc = CrcSpec::preset("crc3");
  BitMatrix p(2, 4);
  p << 1, 0, 0, 1, 0, 0, 0, 1;
  const BitMatrix m = smart_message(p, crc);
  ASSERT_EQ(m.cols(), 7);
  EXPECT_EQ(m.row(0), (BitMatrix(1, 7) << 1, 0, 0, 1, 1, 1, 0).finished());
  for (Eigen::Index r = 0; r < 2; ++r) {
    std::vector<std::uint8_t> row(m.row(r).data(), m.row(r).data() + 7);
    EXPECT_TRUE(crc_verify(row, crc));
  }
}

TEST(EnsembleSpec, Validation) {
  EnsembleSpec spec;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.models = {{"a", {0, -2}, calibrated_model(7, 1)}, {"b", {1, -1}, calibrated_model(6, 2)}};
  EXPECT_THROW(spec.validate(), ConfigError);  // different k
  spec.models[1].model = calibrated_model(7, 2);
  spec.fallback_index = 2;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.fallback_index = 1;
  EXPECT_NO_THROW(spec.validate());
  EXPECT_EQ(spec.payload_len(), 4);
  spec.crc = CrcSpec::preset("crc8");
  EXPECT_THROW(spec.validate(), ConfigError);  // k - r < 1
}

TEST(SmartCodec, SingleMemberMatchesTheCrcStrippedModel) {
  const auto model = calibrated_model(11, 3);
  EnsembleSpec spec;
  spec.models = {{"only", {0, -2}, model}};
  spec.crc = CrcSpec::preset("crc3");
  const SmartCodec smart(spec);
  const CrcStrippedCodec alone(model, CrcSpec::preset("crc3"), "alone");
  SimulationConfig cfg;
  cfg.snr_db = {0.0, 3.0};
  cfg.max_blocks = 1000;
  cfg.batch_size = 250;
  cfg.seed = 8;
  auto a = run_ber_bler(smart, cfg), b = run_ber_bler(alone, cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(smart.payload_bits(), 8);
}

TEST(SmartCodec, TransmitsWithTheFallbackEncoder) {
  const auto fb = calibrated_model(7, 4), other = calibrated_model(7, 5);
  EnsembleSpec spec;
  spec.models = {{"other", {1, -1}, other}, {"fb", {0, -2}, fb}};
  spec.fallback_index = 1;
  Rng rng(6);
  const BitMatrix p = random_bits(rng, 10, 4);
  EXPECT_TRUE(smart_encode(p, spec).isApprox(fb->encode(smart_message(p, spec.crc))));
}

TEST(SmartDecode, SelectionIsConsistentWithMemberDecodes) {
  const auto a = calibrated_model(11, 7), b = calibrated_model(11, 8);
  EnsembleSpec spec;
  spec.models = {{"a", {0, -2}, a}, {"b", {1, -1}, b}};
  spec.crc = CrcSpec::preset("crc3");
  Rng rng(9);
  const BitMatrix p = random_bits(rng, 60, 8);
  const Matrix y = awgn(smart_encode(p, spec), 0.7, rng);
  const SmartDecodeResult r = smart_decode(y, 0.7, spec);
  ASSERT_EQ(r.choices.size(), 60u);
  const Matrix llr = llr_from_channel(y, 0.7);
  // Every member decodes against the fallback encoder's sub-codewords.
  const auto da = decode_tree(llr, a->decoder, a->encoder).bits;
  const auto db = decode_tree(llr, b->decoder, a->encoder).bits;
  for (Eigen::Index i = 0; i < 60; ++i) {
    const BitMatrix& chosen = r.choices[static_cast<std::size_t>(i)].selected == 0 ? da : db;
    EXPECT_EQ(r.payload.row(i), chosen.row(i).leftCols(8));
  }
}
