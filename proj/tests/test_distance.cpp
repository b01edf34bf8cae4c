#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "deeppolar/channel.hpp"
#include "deeppolar/distance.hpp"
#include "deeppolar/neural_coder.hpp"
#include "test_util.hpp"

using namespace dpp;

namespace {

ModelConfig tiny_model() {
  ModelConfig m;
  m.enc_hidden = 8;
  return m;
}

}  // namespace

TEST(AllMessages, CountingOrder) {
  const BitMatrix m = all_messages(3);
  ASSERT_EQ(m.rows(), 8);
  EXPECT_EQ(m.row(1), (BitMatrix(1, 3) << 0, 0, 1).finished());
  EXPECT_EQ(m.row(6), (BitMatrix(1, 3) << 1, 1, 0).finished());
}

TEST(DistanceHistogram, ExhaustivePairsOfAKnownSet) {
  Matrix x(3, 4);
  x << 0, 0, 0, 0, 2, 0, 0, 0, 0, 2, 2, 2;
  DistanceConfig cfg;
  cfg.bins = 4;
  cfg.range_max = 2.0;
  const DistanceHistogram h = distance_histogram(x, cfg);
  EXPECT_EQ(h.pair_count, 3);
  std::vector<double> d = h.distances;
  std::sort(d.begin(), d.end());
  EXPECT_NEAR(d[0], 1.0, 1e-12);             // |(2,0,0,0)| / 2
  EXPECT_NEAR(d[1], std::sqrt(3.0), 1e-12);  // |(0,2,2,2)| / 2
  EXPECT_NEAR(d[2], 2.0, 1e-12);             // |(2,-2,-2,-2)| / 2, clamped into the last bin
  EXPECT_EQ(h.counts, (std::vector<long long>{0, 0, 1, 2}));
  EXPECT_NEAR(h.mean, (1.0 + std::sqrt(3.0) + 2.0) / 3.0, 1e-12);
}

TEST(DistanceHistogram, SubsamplesAboveThePairBudget) {
  Rng rng(2);
  DistanceConfig cfg;
  cfg.max_pairs = 500;
  const DistanceHistogram h = distance_histogram(gaussian_matrix(rng, 100, 8, 1.0), cfg);
  EXPECT_EQ(h.pair_count, 500);
  long long total = 0;
  for (long long c : h.counts) total += c;
  EXPECT_EQ(total, 500);
}

TEST(GaussianReference, MeanNearSqrtTwo) {
  DistanceConfig cfg;
  cfg.samples = 10000;
  cfg.seed = 1;
  const DistanceHistogram h = gaussian_reference(37, cfg);
  EXPECT_EQ(h.sample_count, 10000);
  EXPECT_LT(std::abs(h.mean - std::sqrt(2.0)) / std::sqrt(2.0), 0.02);
}

TEST(PairwiseDistance, DeterministicPerSeed) {
  Rng rng(3);
  const EncoderTree enc(build_info_set(16, 7, 4), tiny_model(), rng);
  DistanceConfig cfg;
  cfg.samples = 300;
  cfg.seed = 4;
  const auto a = pairwise_distance_analysis(enc, cfg), b = pairwise_distance_analysis(enc, cfg);
  EXPECT_EQ(a.distances, b.distances);
  cfg.seed = 5;
  EXPECT_NE(pairwise_distance_analysis(enc, cfg).distances, a.distances);
}

TEST(DistanceSpectrum, ResidualOnlyEncoderMatchesTheExhaustiveLinearCode) {
  // With every learned weight at zero the encoder is the real-valued linear
  // map s -> s G_16 of the bipolar symbols. The oracle enumerates all 2^7
  // codewords of that map directly and takes every pairwise distance by hand.
  const CodeConfig code = build_info_set(16, 7, 4);
  Rng rng(6);
  EncoderTree enc(code, tiny_model(), rng);
  enc.set_zero();
  const BitMatrix msgs = all_messages(7);
  ad::Tape t(false);
  const Matrix x = normalize_power(enc.forward(t, msgs).value());

  const Matrix g = polar_matrix(16).cast<double>();
  Matrix oracle(msgs.rows(), 16);
  for (Eigen::Index r = 0; r < msgs.rows(); ++r) {
    RowVector s = RowVector::Zero(16);
    for (int j = 0; j < 7; ++j) s(code.info_set()[static_cast<std::size_t>(j)]) = msgs(r, j) ? -1.0 : 1.0;
    oracle.row(r) = s * g;
  }
  oracle = normalize_power(oracle);
  std::vector<double> d;
  for (Eigen::Index i = 0; i < oracle.rows(); ++i)
    for (Eigen::Index j = i + 1; j < oracle.rows(); ++j) d.push_back((oracle.row(i) - oracle.row(j)).norm() / 4.0);
  std::sort(d.begin(), d.end());
  std::vector<double> distinct;
  for (double v : d)
    if (distinct.empty() || v - distinct.back() > 1e-9) distinct.push_back(v);

  const std::vector<double> spectrum = distance_spectrum(x);
  ASSERT_EQ(spectrum.size(), distinct.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) EXPECT_NEAR(spectrum[i], distinct[i], 1e-9);
}

TEST(DistanceSpectrum, BinaryPolarCodeIsTheWeightSpectrum) {
  // BPSK images of a binary linear code: normalized distance between
  // codewords at Hamming distance d is 2 sqrt(d / n).
  const CodeConfig code = build_info_set(16, 7, 2);
  const Matrix x = bpsk(polar_transform(code.embed(all_messages(7))));
  std::vector<int> weights;
  const BitMatrix cw = polar_transform(code.embed(all_messages(7)));
  for (Eigen::Index r = 1; r < cw.rows(); ++r) weights.push_back(cw.row(r).cast<int>().sum());
  std::sort(weights.begin(), weights.end());
  weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
  const auto spectrum = distance_spectrum(x);
  ASSERT_EQ(spectrum.size(), weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) EXPECT_NEAR(spectrum[i], 2.0 * std::sqrt(weights[i] / 16.0), 1e-12);
  EXPECT_EQ(weights.front(), 4);
}
