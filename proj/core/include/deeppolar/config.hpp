#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "deeppolar/harness.hpp"
#include "deeppolar/neural_coder.hpp"
#include "deeppolar/trainer.hpp"

namespace dpp {

struct EnsembleConfig {
  std::vector<SnrPair> pairs;             // member training pairs, selection order
  std::vector<std::string> checkpoints;   // one per pair, optional until smart-eval
  std::string crc = "crc3";
  int fallback_index = 0;
  int finetune_epochs = 0;                // decoder-only epochs per non-fallback member
};

struct ExperimentConfig {
  std::string name = "experiment";
  int n = 0;
  int k = 0;
  int ell = 0;
  double design_snr_db = -2.0;
  std::vector<int> info_set;  // empty: density-evolution construction
  ModelConfig model{};
  TrainConfig train{};
  SimulationConfig eval{};
  bool has_ensemble = false;
  EnsembleConfig ensemble{};
  std::string output_dir = "runs/experiment";
  std::uint64_t seed = 0;
  int calibration_batch = 20000;

  CodeConfig code() const;
  /// Semantic validation of every sub-config; throws ConfigError.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

/// Parses and validates; relative checkpoint paths resolve against the file's
/// directory and must exist when listed.
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& c);

/// Named presets: "full_256_37", "tiny_16_7", "smart_tiny".
ExperimentConfig preset_config(std::string_view name);
std::vector<std::string> preset_names();

/// FNV-1a 64 of a byte string as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
/// Digest of the canonical JSON form of a config.
std::string config_digest(const ExperimentConfig& c);

}  // namespace dpp
