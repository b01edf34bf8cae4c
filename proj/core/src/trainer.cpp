#include "deeppolar/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dpp {

namespace {

constexpr std::uint64_t kDecoderData = 1;
constexpr std::uint64_t kEncoderData = 2;
constexpr std::uint64_t kDropout = 3;

std::uint64_t phase_tag(const std::string& phase) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : phase) h = (h ^ c) * 1099511628211ull;
  return h;
}

struct NoisyBatch {
  BitMatrix messages;
  Matrix noise;  // unit-variance
};

NoisyBatch draw_batch(Rng& rng, int batch, int k, int n) {
  NoisyBatch b;
  b.messages = random_bits(rng, batch, k);
  b.noise = gaussian_matrix(rng, batch, n, 1.0);
  return b;
}

std::string kernel_prefix(const char* tree, int level, int pos) {
  return std::string(tree) + "/l" + std::to_string(level) + "/n" + std::to_string(pos);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be at least 1");
  if (phase1_epochs < 0) throw ConfigError("train.phase1_epochs must be non-negative");
  if (batch_size < 2) throw ConfigError("train.batch_size must be at least 2");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (enc_dec_step_ratio < 1) throw ConfigError("train.enc_dec_step_ratio must be at least 1");
  if (!(loss.epsilon > 0.0)) throw ConfigError("train.loss_epsilon must be positive");
  if (validation_batch < 1) throw ConfigError("train.validation_batch must be positive");
  if (sample_snr_range && !(snr_range_low_db <= snr_range_high_db))
    throw ConfigError("train.snr_range: low must not exceed high");
  scheduler().validate();
}

CosineWarmRestarts TrainConfig::scheduler() const {
  return CosineWarmRestarts{learning_rate, min_learning_rate, scheduler_t0, scheduler_t_mult};
}

double cosine_warm_restart_lr(long long step, const TrainConfig& config) { return config.scheduler().rate(step); }

Validation validate_model(const NeuralCode& model, double snr_db, int batch, std::uint64_t seed,
                          const LossConfig& loss) {
  const CodeConfig& code = model.code;
  Rng rng = make_rng(seed, {0x76616c});
  const NoisyBatch b = draw_batch(rng, batch, code.k(), code.n());
  const double sigma = snr_db_to_sigma(snr_db);
  const Matrix x = encode_tree(b.messages, model.encoder);
  const Matrix llr = llr_from_channel(x + sigma * b.noise, sigma);
  ad::Tape tape(false);
  const DecodeTrace t = decode_tree(tape, tape.constant(llr), model.decoder, model.encoder);
  Validation v;
  v.loss = code.k() > 0 ? total_loss(decoder_to_loss_logits(t.info_logits.value()), b.messages, loss) : 0.0;
  long long bit_errors = 0, block_errors = 0;
  for (Eigen::Index r = 0; r < t.bits.rows(); ++r) {
    int e = 0;
    for (Eigen::Index c = 0; c < t.bits.cols(); ++c) e += t.bits(r, c) != b.messages(r, c);
    bit_errors += e;
    block_errors += e > 0;
  }
  v.ber = code.k() > 0 ? static_cast<double>(bit_errors) / (static_cast<double>(batch) * code.k()) : 0.0;
  v.bler = static_cast<double>(block_errors) / batch;
  return v;
}

// ---- Trainer ------------------------------------------------------------------

Trainer::Trainer(NeuralCode& model, const TrainConfig& config, std::string phase, int stage)
    : model_(model),
      config_(config),
      phase_(std::move(phase)),
      stage_(stage),
      phase_tag_(phase_tag(phase_)),
      enc_opt_(model.encoder.parameters()),
      dec_opt_(model.decoder.parameters()) {
  config_.validate();
}

std::uint64_t Trainer::stream(int epoch, int step, std::uint64_t purpose) const {
  return derive_seed(config_.seed, {phase_tag_, static_cast<std::uint64_t>(stage_), static_cast<std::uint64_t>(epoch),
                                    static_cast<std::uint64_t>(step), purpose});
}

double Trainer::step_snr(Rng& rng, double fixed_db) const {
  if (!config_.sample_snr_range) return fixed_db;
  std::uniform_real_distribution<double> u(config_.snr_range_low_db, config_.snr_range_high_db);
  return u(rng);
}

void Trainer::check_finite(double loss, int epoch, int step, double lr, const char* what) const {
  if (std::isfinite(loss)) return;
  std::ostringstream os;
  os << "training diverged: " << what << " loss is " << loss << " (phase " << phase_ << ", stage " << stage_
     << ", epoch " << epoch << ", step " << step << ", learning rate " << lr << ")";
  throw TrainingError(os.str());
}

double Trainer::decoder_step(int epoch, int step, double lr) {
  const CodeConfig& code = model_.code;
  Rng rng(stream(epoch, step, kDecoderData));
  const double sigma = snr_db_to_sigma(step_snr(rng, config_.snr_pair.decoder_db));
  const NoisyBatch b = draw_batch(rng, config_.batch_size, code.k(), code.n());
  const Matrix x = encode_tree(b.messages, model_.encoder);
  const Matrix llr = llr_from_channel(x + sigma * b.noise, sigma);

  ad::Tape tape(true, stream(epoch, step, kDropout));
  DecodeOptions opt;
  opt.feedback = Feedback::Genie;
  opt.genie_messages = &b.messages;
  opt.training = true;
  const DecodeTrace t = decode_tree(tape, tape.constant(llr), model_.decoder, model_.encoder, opt);
  const ad::Var loss = ad::total_loss(ad::scale(t.info_logits, -1.0), b.messages, config_.loss);
  const double value = loss.value()(0, 0);
  check_finite(value, epoch, step, lr, "decoder");
  dec_opt_.zero_grad();
  tape.backward(loss);
  dec_opt_.step(lr);
  return value;
}

double Trainer::encoder_step(int epoch, int step, double lr) {
  const CodeConfig& code = model_.code;
  Rng rng(stream(epoch, step, kEncoderData));
  const double sigma = snr_db_to_sigma(step_snr(rng, config_.snr_pair.encoder_db));
  const NoisyBatch b = draw_batch(rng, config_.batch_size, code.k(), code.n());

  ad::Tape tape(true, stream(epoch, step, kDropout));
  const ad::Var x = ad::normalize_power(model_.encoder.forward(tape, b.messages));
  const ad::Var llr = ad::scale(ad::add(x, tape.constant(sigma * b.noise)), 2.0 / (sigma * sigma));
  DecodeOptions opt;
  opt.feedback = Feedback::Genie;
  opt.genie_messages = &b.messages;
  const DecodeTrace t = decode_tree(tape, llr, model_.decoder, model_.encoder, opt);
  const ad::Var loss = ad::total_loss(ad::scale(t.info_logits, -1.0), b.messages, config_.loss);
  const double value = loss.value()(0, 0);
  check_finite(value, epoch, step, lr, "encoder");
  enc_opt_.zero_grad();
  tape.backward(loss);
  enc_opt_.step(lr);
  return value;
}

EpochRecord Trainer::run_epoch(int epoch) {
  EpochRecord rec;
  rec.phase = phase_;
  rec.stage = stage_;
  rec.epoch = epoch;
  rec.learning_rate = cosine_warm_restart_lr(epoch, config_);
  double dec_sum = 0.0;
  for (int s = 0; s < config_.enc_dec_step_ratio; ++s) dec_sum += decoder_step(epoch, s, rec.learning_rate);
  rec.decoder_loss = dec_sum / config_.enc_dec_step_ratio;
  if (config_.train_encoder) rec.encoder_loss = encoder_step(epoch, config_.enc_dec_step_ratio, rec.learning_rate);
  rec.validation = validate();
  return rec;
}

Validation Trainer::validate() const {
  return validate_model(model_, config_.snr_pair.decoder_db, config_.validation_batch,
                        derive_seed(config_.seed, {phase_tag_, static_cast<std::uint64_t>(stage_)}), config_.loss);
}

// ---- curriculum -----------------------------------------------------------------

std::vector<KernelStage> curriculum_phase1(int ell, const ModelConfig& model, const TrainConfig& config,
                                           const EpochCallback& on_epoch) {
  if (!is_power_of_two(ell) || ell < 2) throw ConfigError("phase 1 needs a power-of-two kernel size >= 2");
  config.validate();
  std::vector<KernelStage> stages;
  NeuralCode current = NeuralCode::create(build_info_set(ell, 1, ell, config.design_snr_db), model, config.seed);
  for (int k = 1; k <= ell; ++k) {
    current.set_code(build_info_set(ell, k, ell, config.design_snr_db));
    Trainer trainer(current, config, "phase1", k);
    KernelStage st;
    st.initial_loss = trainer.validate().loss;
    st.final_loss = st.initial_loss;
    for (int e = 0; e < config.phase1_epochs; ++e) {
      const EpochRecord rec = trainer.run_epoch(e);
      st.final_loss = rec.validation.loss;
      if (on_epoch) on_epoch(rec);
    }
    st.code = current.code;
    st.encoder = current.encoder.kernel(0, 0);
    st.decoder = current.decoder.kernel(0, 0);
    stages.push_back(std::move(st));
  }
  return stages;
}

int active_children(const CodeConfig& code, NodeId node) {
  const int ell = code.ell();
  int count = 1;
  for (int t = 0; t < node.level; ++t) count *= ell;
  const int block = code.n() / count;
  const int child = block / ell;
  int active = 0;
  for (int i = 0; i < ell; ++i) {
    const int start = node.pos * block + i * child;
    for (int p = start; p < start + child; ++p)
      if (!code.is_frozen(p)) {
        ++active;
        break;
      }
  }
  return active;
}

NeuralCode assemble_from_phase1(const CodeConfig& code, const ModelConfig& model,
                                std::span<const KernelStage> stages) {
  if (static_cast<int>(stages.size()) != code.ell())
    throw ConfigError("phase 2 needs one phase-1 stage per k = 1 .. ell");
  // Seed is irrelevant: every kernel is overwritten below.
  NeuralCode out = NeuralCode::create(code, model, 0);
  for (int t = 0; t < code.depth(); ++t)
    for (int b = 0; b < out.encoder.nodes_at(t); ++b) {
      const int k = std::clamp(active_children(code, {t, b}), 1, code.ell());
      const KernelStage& st = stages[static_cast<std::size_t>(k - 1)];
      if (st.encoder.ell() != code.ell()) throw ConfigError("phase-1 kernel size differs from the code's ell");
      EncoderKernel ek = st.encoder;
      ek.params().set_prefix(kernel_prefix("enc", t, b));
      out.encoder.kernel(t, b) = std::move(ek);
      DecoderKernel dk = st.decoder;
      dk.set_prefix(kernel_prefix("dec", t, b));
      out.decoder.kernel(t, b) = std::move(dk);
    }
  return out;
}

Phase2Result curriculum_phase2(NeuralCode& model, const TrainConfig& config, const Phase2Hooks& hooks,
                               const ResumeState* resume) {
  Trainer trainer(model, config, "phase2", 0);
  int first = 0;
  if (resume) {
    if (resume->next_epoch < 0 || resume->next_epoch > config.epochs)
      throw ConfigError("resume epoch lies outside the configured run");
    first = resume->next_epoch;
    trainer.encoder_optimizer().restore(resume->encoder_steps, resume->encoder_m, resume->encoder_v);
    trainer.decoder_optimizer().restore(resume->decoder_steps, resume->decoder_m, resume->decoder_v);
  }
  Phase2Result result;
  result.initial_loss = trainer.validate().loss;
  result.final_loss = result.initial_loss;
  for (int e = first; e < config.epochs; ++e) {
    EpochRecord rec = trainer.run_epoch(e);
    result.final_loss = rec.validation.loss;
    if (hooks.on_epoch) hooks.on_epoch(rec);
    result.log.push_back(std::move(rec));
    const bool scheduled = std::find(config.checkpoint_epochs.begin(), config.checkpoint_epochs.end(), e + 1) !=
                           config.checkpoint_epochs.end();
    if (hooks.on_checkpoint && (scheduled || e + 1 == config.epochs)) hooks.on_checkpoint(e + 1, model, trainer);
  }
  return result;
}

}  // namespace dpp
