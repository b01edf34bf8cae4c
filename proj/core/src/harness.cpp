#include "deeppolar/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "deeppolar/channel.hpp"

namespace dpp {

ErrorStats& ErrorStats::operator+=(const ErrorStats& other) {
  if (blocks == 0) {
    snr_db = other.snr_db;
    payload_bits = other.payload_bits;
  } else if (other.blocks > 0 && other.payload_bits != payload_bits) {
    throw ConfigError("cannot merge error tallies with different payload sizes");
  }
  blocks += other.blocks;
  bit_errors += other.bit_errors;
  block_errors += other.block_errors;
  finalize();
  return *this;
}

void ErrorStats::finalize() {
  ber = blocks > 0 && payload_bits > 0 ? static_cast<double>(bit_errors) / (static_cast<double>(blocks) * payload_bits)
                                       : 0.0;
  bler = blocks > 0 ? static_cast<double>(block_errors) / static_cast<double>(blocks) : 0.0;
  std::tie(ci_low, ci_high) = wilson_interval(block_errors, blocks);
}

std::pair<double, double> wilson_interval(long long successes, long long trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

void SimulationConfig::validate() const {
  if (snr_db.empty()) throw ConfigError("simulation needs at least one SNR point");
  if (min_block_errors < 1) throw ConfigError("min_block_errors must be at least 1");
  if (max_blocks < 1) throw ConfigError("max_blocks must be at least 1");
  if (batch_size < 1) throw ConfigError("simulation batch_size must be at least 1");
}

ErrorStats count_errors(const BitMatrix& sent, const BitMatrix& decoded, double snr_db) {
  if (sent.rows() != decoded.rows() || sent.cols() != decoded.cols())
    throw ConfigError("decoded payload shape does not match the sent payload");
  ErrorStats s;
  s.snr_db = snr_db;
  s.payload_bits = static_cast<int>(sent.cols());
  s.blocks = sent.rows();
  for (Eigen::Index r = 0; r < sent.rows(); ++r) {
    long long e = 0;
    for (Eigen::Index c = 0; c < sent.cols(); ++c) e += sent(r, c) != decoded(r, c);
    s.bit_errors += e;
    s.block_errors += e > 0;
  }
  s.finalize();
  return s;
}

std::vector<ErrorStats> run_ber_bler(const Codec& codec, const SimulationConfig& config) {
  config.validate();
  const int k = codec.payload_bits();
  const int n = codec.block_length();
  std::vector<ErrorStats> out;
  out.reserve(config.snr_db.size());
  for (double snr : config.snr_db) {
    const double sigma = snr_db_to_sigma(snr);
    ErrorStats total;
    total.snr_db = snr;
    total.payload_bits = k;
    for (std::uint64_t batch = 0;
         total.block_errors < config.min_block_errors && total.blocks < config.max_blocks; ++batch) {
      const auto rows = static_cast<Eigen::Index>(
          std::min<long long>(config.batch_size, config.max_blocks - total.blocks));
      Rng rng = make_rng(config.seed, {0x736e72, batch});
      const BitMatrix payload = random_bits(rng, rows, k);
      Matrix y = codec.encode(payload);
      if (y.cols() != n) throw ConfigError("codec '" + codec.id() + "' produced the wrong block length");
      if (!config.noiseless) y += gaussian_matrix(rng, rows, n, sigma);
      total += count_errors(payload, codec.decode(y, sigma), snr);
    }
    total.finalize();
    out.push_back(total);
  }
  return out;
}

std::vector<ConvergenceRow> convergence_sweep(std::span<const LabeledCodec> checkpoints, const SimulationConfig& config) {
  std::vector<ConvergenceRow> rows;
  for (const LabeledCodec& c : checkpoints) {
    if (!c.codec) throw ConfigError("convergence sweep entry has no codec");
    for (const ErrorStats& s : run_ber_bler(*c.codec, config)) rows.push_back({c.epoch, s.snr_db, s.ber, s.bler});
  }
  return rows;
}

MismatchTable snr_mismatch_sweep(std::span<const MismatchModel> models, const SimulationConfig& config) {
  MismatchTable t;
  t.snr_db = config.snr_db;
  for (const MismatchModel& m : models) {
    if (!m.codec) throw ConfigError("mismatch sweep model '" + m.label + "' has no codec");
    t.labels.push_back(m.label);
    t.cells.push_back(run_ber_bler(*m.codec, config));
  }
  return t;
}

std::string MismatchTable::diagonal_report(std::span<const double> train_snr_db) const {
  if (train_snr_db.size() != labels.size()) throw ConfigError("diagonal report needs one training SNR per model");
  std::ostringstream os;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t col = 0;
    for (std::size_t j = 1; j < snr_db.size(); ++j)
      if (std::abs(snr_db[j] - train_snr_db[i]) < std::abs(snr_db[col] - train_snr_db[i])) col = j;
    const double own = cells[i][col].ber;
    double best = own;
    int rank = 1;
    for (std::size_t m = 0; m < labels.size(); ++m) {
      best = std::min(best, cells[m][col].ber);
      if (m != i && cells[m][col].ber < own) ++rank;
    }
    os << labels[i] << ": rank " << rank << " of " << labels.size() << " at " << snr_db[col] << " dB (ber " << own
       << ", best " << best << ")\n";
  }
  return os.str();
}

}  // namespace dpp
