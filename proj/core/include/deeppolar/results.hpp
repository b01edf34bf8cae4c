#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deeppolar/distance.hpp"
#include "deeppolar/harness.hpp"
#include "deeppolar/trainer.hpp"

namespace dpp {

struct ResultRow {
  ErrorStats stats;
  std::string decoder_id;
  std::uint64_t seed = 0;
};

inline constexpr const char* kResultsHeader =
    "snr_db,blocks,bit_errors,block_errors,ber,bler,ci_low,ci_high,decoder_id,seed";

/// Fixed-precision formatting shared by every CSV writer.
std::string format_real(double v);

std::string results_csv(std::span<const ResultRow> rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);

std::string training_log_csv(std::span<const EpochRecord> log);
std::string convergence_csv(std::span<const ConvergenceRow> rows);
std::string mismatch_csv(const MismatchTable& table);

struct HistogramSeries {
  std::string label;
  std::vector<double> edges;
  std::vector<long long> counts;
  double mean = 0.0;
};

HistogramSeries to_series(const DistanceHistogram& h, std::string label);
/// Columns: label,bin_low,bin_high,count.
std::string histogram_csv(std::span<const HistogramSeries> series);
std::vector<HistogramSeries> parse_histogram_csv(const std::string& text);

std::string read_text(const std::filesystem::path& path);
/// Creates parent directories; overwrites.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Run record: command, arguments, config, seed, code version and the digest
/// of every output file. Outputs are keyed by their path relative to base
/// (file name alone when base is empty).
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config, std::uint64_t seed,
                             const std::vector<std::string>& args,
                             const std::vector<std::filesystem::path>& outputs,
                             const std::filesystem::path& base = {});

}  // namespace dpp
