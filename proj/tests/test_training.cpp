#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "deeppolar/checkpoint.hpp"
#include "deeppolar/optimizer.hpp"
#include "deeppolar/schedule.hpp"
#include "deeppolar/trainer.hpp"
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
  m.dropout = 0.1;
  return m;
}

TrainConfig tiny_train(int epochs) {
  TrainConfig t;
  t.epochs = epochs;
  t.phase1_epochs = 2;
  t.batch_size = 32;
  t.learning_rate = 3e-3;
  t.snr_pair = {2.0, 0.0};
  t.scheduler_t0 = 3;
  t.enc_dec_step_ratio = 2;
  t.validation_batch = 64;
  t.seed = 5;
  return t;
}

bool same_weights(const NeuralCode& a, const NeuralCode& b) {
  const auto pa = a.encoder.parameters(), pb = b.encoder.parameters();
  const auto da = a.decoder.parameters(), db = b.decoder.parameters();
  if (pa.size() != pb.size() || da.size() != db.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (pa[i]->value != pb[i]->value) return false;
  for (std::size_t i = 0; i < da.size(); ++i)
    if (da[i]->value != db[i]->value) return false;
  return true;
}

}  // namespace

TEST(Adam, MatchesReferenceUpdates) {
  ad::Parameter p("p", Matrix::Constant(1, 2, 1.0));
  Adam opt({&p});
  double m[2] = {0, 0}, v[2] = {0, 0}, x[2] = {1.0, 1.0};
  const double grads[3][2] = {{0.5, -2.0}, {0.1, 0.0}, {-0.3, 4.0}};
  for (int s = 0; s < 3; ++s) {
    opt.zero_grad();
    p.grad << grads[s][0], grads[s][1];
    opt.step(0.01);
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * grads[s][i];
      v[i] = 0.999 * v[i] + 0.001 * grads[s][i] * grads[s][i];
      const double mh = m[i] / (1 - std::pow(0.9, s + 1)), vh = v[i] / (1 - std::pow(0.999, s + 1));
      x[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(p.value(0, i), x[i], 1e-14);
    }
  }
  EXPECT_EQ(opt.steps(), 3);
}

TEST(Adam, FirstStepMovesByTheLearningRate) {
  ad::Parameter p("p", Matrix::Zero(1, 3));
  Adam opt({&p});
  opt.zero_grad();
  p.grad << 3.0, -0.01, 0.0;
  opt.step(0.1);
  EXPECT_NEAR(p.value(0, 0), -0.1, 1e-8);
  EXPECT_NEAR(p.value(0, 1), 0.1, 1e-5);
  EXPECT_EQ(p.value(0, 2), 0.0);
}

TEST(Adam, RestoreChecksShapes) {
  ad::Parameter p("p", Matrix::Zero(2, 2));
  Adam opt({&p});
  EXPECT_THROW(opt.restore(1, {Matrix::Zero(1, 2)}, {Matrix::Zero(2, 2)}), FormatError);
  opt.restore(4, {Matrix::Ones(2, 2)}, {Matrix::Ones(2, 2)});
  EXPECT_EQ(opt.steps(), 4);
}

TEST(Schedule, CosineWarmRestarts) {
  const CosineWarmRestarts s{1e-3, 1e-5, 4, 2};
  auto cosine = [](double t, double period) { return 1e-5 + 0.5 * (1e-3 - 1e-5) * (1 + std::cos(std::numbers::pi * t / period)); };
  EXPECT_DOUBLE_EQ(s.rate(0), 1e-3);
  EXPECT_NEAR(s.rate(2), cosine(2, 4), 1e-15);
  EXPECT_NEAR(s.rate(4), 1e-5, 1e-15);
  EXPECT_DOUBLE_EQ(s.rate(5), 1e-3);  // restart
  EXPECT_NEAR(s.rate(5 + 3), cosine(3, 8), 1e-15);
  EXPECT_NEAR(s.rate(5 + 8), 1e-5, 1e-15);
  EXPECT_DOUBLE_EQ(s.rate(5 + 9), 1e-3);
  long long start = 0, len = 0;
  s.locate(20, start, len);
  EXPECT_EQ(start, 14);
  EXPECT_EQ(len, 16);
  for (long long t = 0; t < 200; ++t) {
    EXPECT_LE(s.rate(t), 1e-3 + 1e-18);
    EXPECT_GE(s.rate(t), 1e-5 - 1e-18);
  }
  EXPECT_THROW((CosineWarmRestarts{1e-3, 1e-2, 4, 2}.validate()), ConfigError);
  EXPECT_THROW((CosineWarmRestarts{1e-3, 1e-5, 0, 2}.validate()), ConfigError);
}

TEST(TrainConfig, Validation) {
  TrainConfig t = tiny_train(3);
  EXPECT_NO_THROW(t.validate());
  t.batch_size = 0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = tiny_train(3);
  t.learning_rate = -1;
  EXPECT_THROW(t.validate(), ConfigError);
  t = tiny_train(3);
  t.enc_dec_step_ratio = 0;
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(Curriculum, ActiveChildren) {
  const CodeConfig code(16, 7, 4, {7, 10, 11, 12, 13, 14, 15});
  EXPECT_EQ(active_children(code, {0, 0}), 3);
  EXPECT_EQ(active_children(code, {1, 0}), 0);
  EXPECT_EQ(active_children(code, {1, 1}), 1);
  EXPECT_EQ(active_children(code, {1, 2}), 2);
  EXPECT_EQ(active_children(code, {1, 3}), 4);
}

TEST(Curriculum, PhaseOneProducesOneStagePerK) {
  const auto stages = curriculum_phase1(4, tiny_model(), tiny_train(2));
  ASSERT_EQ(stages.size(), 4u);
  for (int k = 1; k <= 4; ++k) {
    EXPECT_EQ(stages[static_cast<std::size_t>(k - 1)].code.k(), k);
    EXPECT_EQ(stages[static_cast<std::size_t>(k - 1)].code.n(), 4);
    EXPECT_TRUE(std::isfinite(stages[static_cast<std::size_t>(k - 1)].final_loss));
  }
  const NeuralCode full = assemble_from_phase1(build_info_set(16, 7, 4), tiny_model(), stages);
  // Node (1, 3) carries four info bits and copies the k = 4 stage's kernel.
  const auto& a = full.encoder.kernel(1, 3).params();
  const auto& b = stages[3].encoder.params();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].value, b[i].value);
  EXPECT_EQ(a[0].name.rfind("enc/l1/n3/", 0), 0u);
  // Node (1, 0) has no active child and takes the k = 1 stage.
  EXPECT_EQ(full.decoder.kernel(1, 1).net(0).params()[0].value, stages[0].decoder.net(0).params()[0].value);
}

TEST(Trainer, DeterministicUnderFixedSeed) {
  const CodeConfig code = build_info_set(16, 7, 4);
  NeuralCode a = NeuralCode::create(code, tiny_model(), 1), b = NeuralCode::create(code, tiny_model(), 1);
  const TrainConfig cfg = tiny_train(3);
  const auto ra = curriculum_phase2(a, cfg), rb = curriculum_phase2(b, cfg);
  EXPECT_TRUE(same_weights(a, b));
  ASSERT_EQ(ra.log.size(), 3u);
  for (std::size_t i = 0; i < ra.log.size(); ++i) EXPECT_EQ(ra.log[i].decoder_loss, rb.log[i].decoder_loss);
  NeuralCode c = NeuralCode::create(code, tiny_model(), 1);
  TrainConfig other = cfg;
  other.seed = 6;
  curriculum_phase2(c, other);
  EXPECT_FALSE(same_weights(a, c));
}

TEST(Trainer, ResumeReproducesTheUninterruptedRun) {
  const CodeConfig code = build_info_set(16, 7, 4);
  TrainConfig cfg = tiny_train(4);
  cfg.checkpoint_epochs = {2};
  NeuralCode straight = NeuralCode::create(code, tiny_model(), 2);
  std::string saved;
  Phase2Hooks hooks;
  hooks.on_checkpoint = [&](int epoch, const NeuralCode& m, const Trainer& t) {
    if (epoch == 2) saved = serialize_checkpoint(make_checkpoint(m, epoch, cfg.snr_pair, cfg.seed, &t));
  };
  curriculum_phase2(straight, cfg, hooks);
  ASSERT_FALSE(saved.empty());

  const Checkpoint ckpt = parse_checkpoint(saved);
  EXPECT_EQ(ckpt.epoch, 2);
  NeuralCode resumed = model_from_checkpoint(ckpt);
  const ResumeState state = resume_state(ckpt, resumed);
  EXPECT_EQ(state.next_epoch, 2);
  const auto r = curriculum_phase2(resumed, cfg, {}, &state);
  EXPECT_EQ(r.log.size(), 2u);
  EXPECT_TRUE(same_weights(straight, resumed));
}

TEST(Trainer, DecoderOnlyLeavesTheEncoderAlone) {
  const CodeConfig code = build_info_set(16, 7, 4);
  NeuralCode m = NeuralCode::create(code, tiny_model(), 3);
  const NeuralCode before = m;
  TrainConfig cfg = tiny_train(2);
  cfg.train_encoder = false;
  const auto r = curriculum_phase2(m, cfg);
  for (const auto& rec : r.log) EXPECT_EQ(rec.encoder_loss, 0.0);
  const auto pa = m.encoder.parameters();
  const auto pb = before.encoder.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
  EXPECT_FALSE(same_weights(m, before));
}

TEST(Trainer, DivergenceRaisesWithDiagnostics) {
  const CodeConfig code = build_info_set(16, 7, 4);
  NeuralCode m = NeuralCode::create(code, tiny_model(), 4);
  // The last leaf's final position network always runs for this code.
  m.decoder.parameters().back()->value(0, 0) = std::numeric_limits<double>::quiet_NaN();
  Trainer t(m, tiny_train(1), "phase2", 0);
  try {
    t.decoder_step(0, 0, 1e-3);
    FAIL() << "expected a TrainingError";
  } catch (const TrainingError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("phase2"), std::string::npos);
    EXPECT_NE(what.find("epoch"), std::string::npos);
  }
}

TEST(Trainer, LearningLowersTheLoss) {
  const CodeConfig code = build_info_set(16, 7, 4);
  NeuralCode m = NeuralCode::create(code, tiny_model(), 5);
  TrainConfig cfg = tiny_train(12);
  cfg.batch_size = 128;
  cfg.validation_batch = 500;
  cfg.scheduler_t0 = 12;
  const auto r = curriculum_phase2(m, cfg);
  EXPECT_LT(r.final_loss, r.initial_loss);
}

TEST(Validation, UntrainedDecoderIsNearChance) {
  NeuralCode m = NeuralCode::create(build_info_set(16, 7, 4), tiny_model(), 6);
  const Validation v = validate_model(m, 0.0, 2000, 1);
  EXPECT_GT(v.ber, 0.35);
  EXPECT_LT(v.ber, 0.65);
  EXPECT_GT(v.bler, 0.9);
}
