#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "deeppolar/results.hpp"

namespace dpp {

/// Raised when a plot input holds no data rows; nothing is written.
class EmptyDataError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// BER (solid) and BLER (dashed) against SNR on a log-scale y axis, one
/// colour per decoder_id. Zero rates are left off the curve.
std::string render_error_curves_svg(std::span<const ResultRow> rows, const std::string& title);

/// Overlaid step histograms, normalized to unit area.
std::string render_histogram_svg(std::span<const HistogramSeries> series, const std::string& title);

void plot_results_file(const std::filesystem::path& csv, const std::filesystem::path& svg, const std::string& title);
void plot_histogram_file(const std::filesystem::path& csv, const std::filesystem::path& svg, const std::string& title);

}  // namespace dpp
