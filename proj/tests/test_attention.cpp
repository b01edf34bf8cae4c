#include <gtest/gtest.h>

#include <numeric>

#include "deeppolar/attention.hpp"
#include "test_util.hpp"

using namespace dpp;

namespace {

ModelConfig tiny_model() {
  ModelConfig m;
  m.dec_hidden = 16;
  m.heads = 2;
  m.head_dim = 8;
  m.dec_layers = 2;
  m.dropout = 0.1;
  return m;
}

}  // namespace

TEST(Attention, LengthOneIsTheValuePath) {
  Rng rng(1);
  const AttentionWeights w = AttentionWeights::random(16, 4, 8, rng);
  const Matrix x = gaussian_matrix(rng, 1, 16, 1.0);
  EXPECT_EQ(multi_head_attention(x, w), (x * w.wv) * w.wo);
  const Matrix q = gaussian_matrix(rng, 1, 8, 1.0), k = gaussian_matrix(rng, 1, 8, 1.0), v = gaussian_matrix(rng, 1, 8, 1.0);
  EXPECT_EQ(scaled_dot_attention(q, k, v), v);
}

TEST(Attention, RowsAreStochastic) {
  Rng rng(2);
  for (int t : {1, 3, 20}) {
    const Matrix a = attention_weights(gaussian_matrix(rng, t, 8, 4.0), gaussian_matrix(rng, t, 8, 4.0));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      EXPECT_NEAR(a.row(i).sum(), 1.0, 1e-6);
      EXPECT_GE(a.row(i).minCoeff(), 0.0);
    }
  }
  const Matrix huge = attention_weights(Matrix::Constant(2, 4, 1e3), Matrix::Constant(2, 4, 1e3));
  EXPECT_TRUE(huge.allFinite());
}

TEST(Attention, ScaledDotMatchesDirectFormula) {
  Rng rng(3);
  const Matrix q = gaussian_matrix(rng, 5, 4, 1.0), k = gaussian_matrix(rng, 5, 4, 1.0), v = gaussian_matrix(rng, 5, 3, 1.0);
  Matrix s = q * k.transpose() / 2.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    s.row(i) = (s.row(i).array() - s.row(i).maxCoeff()).exp().matrix();
    s.row(i) /= s.row(i).sum();
  }
  EXPECT_TRUE(scaled_dot_attention(q, k, v).isApprox(s * v, 1e-12));
}

TEST(Attention, MultiHeadIsConcatenationOfHeads) {
  Rng rng(4);
  const AttentionWeights w = AttentionWeights::random(12, 3, 4, rng);
  const Matrix x = gaussian_matrix(rng, 6, 12, 1.0);
  Matrix concat(6, 12);
  for (int h = 0; h < 3; ++h)
    concat.middleCols(h * 4, 4) = scaled_dot_attention(x * w.wq.middleCols(h * 4, 4), x * w.wk.middleCols(h * 4, 4),
                                                       x * w.wv.middleCols(h * 4, 4));
  EXPECT_TRUE(multi_head_attention(x, w).isApprox(concat * w.wo, 1e-12));
}

TEST(Attention, PermutationEquivariant) {
  Rng rng(5);
  const AttentionWeights w = AttentionWeights::random(8, 2, 4, rng);
  const Matrix x = gaussian_matrix(rng, 7, 8, 1.0);
  std::vector<int> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix xp(7, 8);
  for (int i = 0; i < 7; ++i) xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
  const Matrix y = multi_head_attention(x, w), yp = multi_head_attention(xp, w);
  for (int i = 0; i < 7; ++i) EXPECT_TRUE(yp.row(i).isApprox(y.row(perm[static_cast<std::size_t>(i)]), 1e-12));
}

TEST(SaBlock, PreservesShape) {
  Rng rng(6);
  const AttentionWeights w = AttentionWeights::random(16, 4, 8, rng);
  for (int t : {1, 4, 20}) {
    const Matrix x = gaussian_matrix(rng, t, 16, 1.0);
    const Matrix y = sa_block(x, w, true, 3);
    EXPECT_EQ(y.rows(), t);
    EXPECT_EQ(y.cols(), 16);
    EXPECT_EQ(sa_block(x, w, false).rows(), t);
  }
}

TEST(SaBlock, ZeroAttentionIsLayerNormOfInput) {
  Rng rng(7);
  const AttentionWeights w = AttentionWeights::zeros(8, 2, 4);
  const Matrix x = gaussian_matrix(rng, 3, 8, 2.0);
  const Matrix y = sa_block(x, w, false);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    EXPECT_TRUE(y.row(i).isApprox(((x.row(i).array() - mean) / std::sqrt(var + 1e-5)).matrix(), 1e-12));
  }
}

TEST(SaBlock, DropoutDeterministicPerSeed) {
  Rng rng(8);
  const AttentionWeights w = AttentionWeights::random(8, 2, 4, rng, 0.5);
  const Matrix x = gaussian_matrix(rng, 4, 8, 1.0);
  EXPECT_EQ(sa_block(x, w, true, 11), sa_block(x, w, true, 11));
  EXPECT_NE(sa_block(x, w, true, 11), sa_block(x, w, true, 12));
  EXPECT_EQ(sa_block(x, w, false, 11), sa_block(x, w, false, 12));
}

TEST(Attention, EmptySequenceIsRejected) {
  Rng rng(9);
  const AttentionWeights w = AttentionWeights::random(8, 2, 4, rng);
  EXPECT_THROW(multi_head_attention(Matrix(0, 8), w), DomainError);
}

TEST(PlusDecoder, InputLayoutAndWidth) {
  Rng rng(10);
  const AttentionPositionNet net(4 + 2, tiny_model(), rng);
  const double llr[] = {1.0, -2.0, 0.5, 3.0};
  const std::uint8_t prefix[] = {0, 1};
  Matrix x(1, 6);
  x << 1.0, -2.0, 0.5, 3.0, 1.0, -1.0;
  ad::Tape t(false);
  EXPECT_DOUBLE_EQ(plus_decoder_forward(llr, prefix, net, false), net.forward(t, t.constant(x), false).value()(0, 0));
  const std::uint8_t short_prefix[] = {0};
  EXPECT_THROW(plus_decoder_forward(llr, short_prefix, net, false), ConfigError);
}

TEST(PlusDecoder, AttentionAblationDiffersOnlyWhenAttentionIsLive) {
  Rng rng(11);
  AttentionPositionNet net(5, tiny_model(), rng);
  const Matrix x = gaussian_matrix(rng, 3, 5, 1.0);
  ad::Tape t1(false), t2(false);
  const Matrix with = net.forward(t1, t1.constant(x), false).value();
  const Matrix without = net.forward_without_attention(t2, t2.constant(x)).value();
  EXPECT_FALSE(with.isApprox(without));
  AttentionWeights w = net.attention();
  w.wo.setZero();
  net.set_attention(w);
  ad::Tape t3(false), t4(false);
  EXPECT_TRUE(net.forward(t3, t3.constant(x), false).value().isApprox(net.forward_without_attention(t4, t4.constant(x)).value(),
                                                                    1e-14));
  w.wq = Matrix::Zero(3, 3);
  EXPECT_THROW(net.set_attention(w), ConfigError);
}
