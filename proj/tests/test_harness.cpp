#include <gtest/gtest.h>

#include <cmath>

#include "deeppolar/channel.hpp"
#include "deeppolar/codec.hpp"
#include "deeppolar/harness.hpp"
#include "test_util.hpp"

using namespace dpp;
using dpp::testing::q_function;

TEST(CountErrors, Example) {
  BitMatrix sent(3, 4), got(3, 4);
  sent << 0, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 0;
  got << 0, 1, 1, 0, 1, 0, 1, 0, 0, 0, 0, 1;
  const ErrorStats s = count_errors(sent, got, 1.5);
  EXPECT_EQ(s.blocks, 3);
  EXPECT_EQ(s.bit_errors, 3);
  EXPECT_EQ(s.block_errors, 2);
  EXPECT_DOUBLE_EQ(s.ber, 3.0 / 12.0);
  EXPECT_DOUBLE_EQ(s.bler, 2.0 / 3.0);
  EXPECT_THROW(count_errors(sent, BitMatrix::Zero(3, 3), 0.0), ConfigError);
}

TEST(ErrorStats, AccumulationMatchesOneTally) {
  Rng rng(1);
  const BitMatrix a = random_bits(rng, 40, 5), b = random_bits(rng, 40, 5);
  ErrorStats first = count_errors(a.topRows(15), b.topRows(15), 0.0);
  first += count_errors(a.bottomRows(25), b.bottomRows(25), 0.0);
  EXPECT_EQ(first, count_errors(a, b, 0.0));
}

TEST(Wilson, KnownValues) {
  const auto [lo, hi] = wilson_interval(0, 10);
  EXPECT_DOUBLE_EQ(lo, 0.0);
  EXPECT_NEAR(hi, 0.2775, 1e-4);
  const auto [l2, h2] = wilson_interval(50, 100);
  EXPECT_NEAR(l2, 0.4038, 1e-4);
  EXPECT_NEAR(h2, 0.5962, 1e-4);
  const auto [l3, h3] = wilson_interval(10, 10);
  EXPECT_NEAR(l3, 0.7225, 1e-4);
  EXPECT_DOUBLE_EQ(h3, 1.0);
}

TEST(Wilson, CoversTheUncodedErrorProbability) {
  // One-bit uncoded blocks: bler is a binomial proportion with known mean
  // Q(1/sigma). The nominal 95% interval should cover it about 95% of runs.
  const UncodedCodec codec(1);
  const double snr = 2.0;
  const double truth = q_function(1.0 / snr_db_to_sigma(snr));
  int covered = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    SimulationConfig cfg;
    cfg.snr_db = {snr};
    cfg.min_block_errors = 1000000;
    cfg.max_blocks = 400;
    cfg.batch_size = 400;
    cfg.seed = static_cast<std::uint64_t>(r);
    const ErrorStats s = run_ber_bler(codec, cfg)[0];
    covered += s.ci_low <= truth && truth <= s.ci_high;
  }
  // Binomial(200, 0.95): 3 standard deviations is about 9 runs.
  EXPECT_GE(covered, 181);
  EXPECT_LE(covered, 199);
}

TEST(Harness, UncodedBerTracksTheGaussianTail) {
  const UncodedCodec codec(20);
  SimulationConfig cfg;
  cfg.snr_db = {-2.0, 0.0, 3.0};
  cfg.min_block_errors = 1000000;
  cfg.max_blocks = 20000;
  cfg.batch_size = 2000;
  cfg.seed = 3;
  for (const ErrorStats& s : run_ber_bler(codec, cfg)) {
    const double p = q_function(1.0 / snr_db_to_sigma(s.snr_db));
    const double se = std::sqrt(p * (1 - p) / (20.0 * static_cast<double>(s.blocks)));
    EXPECT_LT(std::abs(s.ber - p), 3 * se) << s.snr_db;
    EXPECT_EQ(s.blocks, 20000);
  }
}

TEST(Harness, DeterministicAndStopsOnErrorCount) {
  const PolarScCodec sc(build_info_set(16, 7, 2));
  SimulationConfig cfg;
  cfg.snr_db = {0.0, 2.0};
  cfg.min_block_errors = 50;
  cfg.max_blocks = 50000;
  cfg.batch_size = 100;
  cfg.seed = 9;
  const auto a = run_ber_bler(sc, cfg), b = run_ber_bler(sc, cfg);
  EXPECT_EQ(a, b);
  for (const auto& s : a) {
    EXPECT_GE(s.block_errors, 50);
    EXPECT_EQ(s.blocks % 100, 0);
    EXPECT_LT(s.blocks, 50000);
  }
  cfg.seed = 10;
  EXPECT_NE(run_ber_bler(sc, cfg), a);
}

TEST(Harness, CommonRandomNumbersMakeErrorsMonotone) {
  // The same payloads and unit noise serve every SNR point, so for the
  // uncoded codec a bit that survives at low SNR survives at high SNR.
  const UncodedCodec codec(8);
  SimulationConfig cfg;
  cfg.snr_db = {-1.0, 0.0, 1.0, 2.0, 3.0};
  cfg.min_block_errors = 1000000;
  cfg.max_blocks = 3000;
  cfg.batch_size = 1000;
  const auto stats = run_ber_bler(codec, cfg);
  for (std::size_t i = 1; i < stats.size(); ++i) EXPECT_LE(stats[i].bit_errors, stats[i - 1].bit_errors);
}

TEST(Harness, NoiselessRunHasNoErrors) {
  const PolarScCodec sc(build_info_set(16, 7, 2));
  SimulationConfig cfg;
  cfg.snr_db = {-3.0};
  cfg.noiseless = true;
  cfg.max_blocks = 2000;
  cfg.batch_size = 500;
  const ErrorStats s = run_ber_bler(sc, cfg)[0];
  EXPECT_EQ(s.bit_errors, 0);
  EXPECT_EQ(s.blocks, 2000);
}

TEST(Harness, ScBaselineMatchesReferenceRates) {
  // Reference values for the (16,7) density-evolution code under exact SC,
  // from a 2e5-block run: BER 0.0874 at 0 dB, 0.0101 at 3 dB.
  const PolarScCodec sc(build_info_set(16, 7, 2));
  SimulationConfig cfg;
  cfg.snr_db = {0.0, 3.0};
  cfg.min_block_errors = 1000000;
  cfg.max_blocks = 20000;
  cfg.batch_size = 2000;
  cfg.seed = 4;
  const auto s = run_ber_bler(sc, cfg);
  EXPECT_NEAR(s[0].ber, 0.0874, 0.006);
  EXPECT_NEAR(s[1].ber, 0.0101, 0.002);
}

TEST(SimulationConfig, Validation) {
  SimulationConfig cfg;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.snr_db = {0.0};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Mismatch, TableShapeAndDiagonalReport) {
  const UncodedCodec a(4);
  const PolarScCodec b(build_info_set(4, 4, 2));
  const MismatchModel models[] = {{"u", 0.0, &a}, {"sc", 2.0, &b}};
  SimulationConfig cfg;
  cfg.snr_db = {0.0, 2.0};
  cfg.max_blocks = 1000;
  cfg.batch_size = 500;
  const MismatchTable t = snr_mismatch_sweep(models, cfg);
  ASSERT_EQ(t.cells.size(), 2u);
  ASSERT_EQ(t.cells[0].size(), 2u);
  const double train[] = {0.0, 2.0};
  const std::string report = t.diagonal_report(train);
  EXPECT_NE(report.find("u"), std::string::npos);
  EXPECT_NE(report.find("sc"), std::string::npos);
}
