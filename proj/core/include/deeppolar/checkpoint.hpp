#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "deeppolar/model.hpp"
#include "deeppolar/trainer.hpp"

namespace dpp {

inline constexpr int kCheckpointFormatVersion = 1;

struct OptimizerState {
  long long steps = 0;
  std::map<std::string, Matrix> first;   // keyed by parameter name
  std::map<std::string, Matrix> second;
};

/// Self-describing model snapshot. Arrays are keyed by full parameter names
/// ("enc/l0/n0/w1", "dec/l1/n3/j2/theta1", ...).
struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  CodeConfig code;
  ModelConfig model;
  bool calibrated = false;
  PowerNormalizer norm;
  std::map<std::string, Matrix> arrays;
  bool has_optimizer = false;
  OptimizerState encoder_optimizer;
  OptimizerState decoder_optimizer;
  int epoch = 0;
  SnrPair snr_pair{};
  std::uint64_t seed = 0;
};

Checkpoint make_checkpoint(const NeuralCode& model, int epoch, const SnrPair& pair, std::uint64_t seed,
                           const Trainer* trainer = nullptr);
NeuralCode model_from_checkpoint(const Checkpoint& ckpt);
/// Optimizer moments matched to the parameter order of `model`.
ResumeState resume_state(const Checkpoint& ckpt, const NeuralCode& model);

/// Canonical JSON text including the content digest.
std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError on malformed text, version mismatch or digest failure.
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dpp
