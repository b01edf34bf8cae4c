#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deeppolar/codec.hpp"

namespace dpp {

struct ErrorStats {
  double snr_db = 0.0;
  int payload_bits = 0;
  long long blocks = 0;
  long long bit_errors = 0;
  long long block_errors = 0;
  double ber = 0.0;
  double bler = 0.0;
  double ci_low = 0.0;   // Wilson 95% interval on bler
  double ci_high = 0.0;

  /// Adds another tally at the same SNR and recomputes the rates.
  ErrorStats& operator+=(const ErrorStats& other);
  void finalize();
  friend bool operator==(const ErrorStats&, const ErrorStats&) = default;
};

/// Wilson score interval for a binomial proportion (z = 1.96 by default).
std::pair<double, double> wilson_interval(long long successes, long long trials, double z = 1.959963984540054);

struct SimulationConfig {
  std::vector<double> snr_db;
  long long min_block_errors = 100;
  long long max_blocks = 100000;
  int batch_size = 1000;
  std::uint64_t seed = 0;
  // Skip the noise but still decode with each point's nominal sigma.
  bool noiseless = false;

  void validate() const;
};

/// Counts errors between decoded and sent payloads (same shape).
ErrorStats count_errors(const BitMatrix& sent, const BitMatrix& decoded, double snr_db);

/// Monte-Carlo BER/BLER per SNR point. Batch b at every SNR uses the same
/// payloads and unit noise (common random numbers scaled by sigma), so curves
/// are smooth across points and each run is a pure function of the seed.
std::vector<ErrorStats> run_ber_bler(const Codec& codec, const SimulationConfig& config);

struct ConvergenceRow {
  int epoch = 0;
  double snr_db = 0.0;
  double ber = 0.0;
  double bler = 0.0;
};

struct LabeledCodec {
  int epoch = 0;
  const Codec* codec = nullptr;
};

std::vector<ConvergenceRow> convergence_sweep(std::span<const LabeledCodec> checkpoints, const SimulationConfig& config);

struct MismatchModel {
  std::string label;
  double train_snr_db = 0.0;  // the SNR the model is expected to be best at
  const Codec* codec = nullptr;
};

struct MismatchTable {
  std::vector<std::string> labels;
  std::vector<double> snr_db;
  std::vector<std::vector<ErrorStats>> cells;  // [model][snr]

  /// One line per model: its BER rank at the test SNR closest to its own
  /// training SNR, and the gap to the best model there.
  std::string diagonal_report(std::span<const double> train_snr_db) const;
};

MismatchTable snr_mismatch_sweep(std::span<const MismatchModel> models, const SimulationConfig& config);

}  // namespace dpp
