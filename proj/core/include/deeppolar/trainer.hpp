#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "deeppolar/loss.hpp"
#include "deeppolar/model.hpp"
#include "deeppolar/optimizer.hpp"
#include "deeppolar/schedule.hpp"

namespace dpp {

/// (encoder-training SNR, decoder-training SNR) in dB.
struct SnrPair {
  double encoder_db = 0.0;
  double decoder_db = -2.0;
  friend bool operator==(const SnrPair&, const SnrPair&) = default;
};

struct TrainConfig {
  int epochs = 500;          // phase 2
  int phase1_epochs = 100;   // per phase-1 stage
  int batch_size = 20000;
  double learning_rate = 1e-3;
  SnrPair snr_pair{};
  int scheduler_t0 = 50;     // epochs
  int scheduler_t_mult = 2;
  double min_learning_rate = 1e-5;
  int enc_dec_step_ratio = 5;  // decoder steps per encoder step
  std::uint64_t seed = 0;
  LossConfig loss{};
  double design_snr_db = -2.0;  // information sets of the phase-1 kernel codes
  // When set, every step draws its SNR uniformly from [low, high] instead of
  // using the fixed pair.
  bool sample_snr_range = false;
  double snr_range_low_db = -5.0;
  double snr_range_high_db = 0.0;
  // false: only decoder steps, against a fixed encoder.
  bool train_encoder = true;
  int validation_batch = 2000;
  std::vector<int> checkpoint_epochs;

  void validate() const;
  CosineWarmRestarts scheduler() const;
};

/// Learning rate for an epoch index within one training run.
double cosine_warm_restart_lr(long long step, const TrainConfig& config);

struct Validation {
  double loss = 0.0;
  double ber = 0.0;
  double bler = 0.0;
};

/// Total loss, BER and BLER on a fixed batch with decision feedback and no
/// dropout. Codewords are normalized with the batch's own statistics.
Validation validate_model(const NeuralCode& model, double snr_db, int batch, std::uint64_t seed,
                          const LossConfig& loss = {});

struct EpochRecord {
  std::string phase;
  int stage = 0;
  int epoch = 0;
  double learning_rate = 0.0;
  double decoder_loss = 0.0;  // mean over the epoch's decoder steps
  double encoder_loss = 0.0;  // NaN-free; 0 when no encoder step ran
  Validation validation{};
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Alternating encoder/decoder optimization of one NeuralCode.
class Trainer {
 public:
  Trainer(NeuralCode& model, const TrainConfig& config, std::string phase, int stage);

  /// One epoch: enc_dec_step_ratio decoder steps, then one encoder step.
  EpochRecord run_epoch(int epoch);
  double decoder_step(int epoch, int step, double learning_rate);
  double encoder_step(int epoch, int step, double learning_rate);
  Validation validate() const;

  Adam& encoder_optimizer() { return enc_opt_; }
  Adam& decoder_optimizer() { return dec_opt_; }
  const Adam& encoder_optimizer() const { return enc_opt_; }
  const Adam& decoder_optimizer() const { return dec_opt_; }
  const TrainConfig& config() const { return config_; }

 private:
  std::uint64_t stream(int epoch, int step, std::uint64_t purpose) const;
  double step_snr(Rng& rng, double fixed_db) const;
  void check_finite(double loss, int epoch, int step, double lr, const char* what) const;

  NeuralCode& model_;
  TrainConfig config_;
  std::string phase_;
  int stage_;
  std::uint64_t phase_tag_;
  Adam enc_opt_;
  Adam dec_opt_;
};

/// One trained single-kernel code (n = ell) of the first curriculum phase.
struct KernelStage {
  CodeConfig code;
  EncoderKernel encoder;
  DecoderKernel decoder;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

/// Progressive single-kernel training for k = 1 .. ell; stage k starts from
/// stage k - 1's weights. Throws TrainingError on divergence.
std::vector<KernelStage> curriculum_phase1(int ell, const ModelConfig& model, const TrainConfig& config,
                                           const EpochCallback& on_epoch = {});

/// Number of children of node (level, pos) that carry any information bit.
int active_children(const CodeConfig& code, NodeId node);

/// Full trees whose every node copies the phase-1 stage matching its number
/// of active children (clamped to [1, ell]).
NeuralCode assemble_from_phase1(const CodeConfig& code, const ModelConfig& model,
                                std::span<const KernelStage> stages);

struct ResumeState {
  int next_epoch = 0;
  long long encoder_steps = 0;
  std::vector<Matrix> encoder_m, encoder_v;
  long long decoder_steps = 0;
  std::vector<Matrix> decoder_m, decoder_v;
};

struct Phase2Hooks {
  EpochCallback on_epoch;
  // Called after every epoch listed in TrainConfig::checkpoint_epochs and after the last one.
  std::function<void(int epoch, const NeuralCode&, const Trainer&)> on_checkpoint;
};

struct Phase2Result {
  std::vector<EpochRecord> log;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

/// End-to-end training of full trees. With `resume`, model must already hold
/// the checkpointed weights; training continues at resume->next_epoch.
Phase2Result curriculum_phase2(NeuralCode& model, const TrainConfig& config, const Phase2Hooks& hooks = {},
                               const ResumeState* resume = nullptr);

}  // namespace dpp
