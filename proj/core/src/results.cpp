#include "deeppolar/results.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "deeppolar/config.hpp"

namespace dpp {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> data_lines(const std::string& text, const std::string& header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("CSV is empty (no header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw FormatError("unexpected CSV header '" + line + "'");
  std::vector<std::string> out;
  while (std::getline(in, line))
    if (!line.empty() && line != "\r") out.push_back(line);
  return out;
}

double to_real(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("CSV line " + std::to_string(line) + ": '" + s + "' is not a number");
  }
}

long long to_int(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("CSV line " + std::to_string(line) + ": '" + s + "' is not an integer");
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string results_csv(std::span<const ResultRow> rows) {
  std::ostringstream os;
  os << kResultsHeader << '\n';
  for (const ResultRow& r : rows) {
    const ErrorStats& s = r.stats;
    os << format_real(s.snr_db) << ',' << s.blocks << ',' << s.bit_errors << ',' << s.block_errors << ','
       << format_real(s.ber) << ',' << format_real(s.bler) << ',' << format_real(s.ci_low) << ','
       << format_real(s.ci_high) << ',' << r.decoder_id << ',' << r.seed << '\n';
  }
  return os.str();
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::vector<ResultRow> rows;
  std::size_t no = 1;
  for (const std::string& line : data_lines(text, kResultsHeader)) {
    ++no;
    const auto f = split(line, ',');
    if (f.size() != 10) throw FormatError("results CSV line " + std::to_string(no) + " does not have 10 fields");
    ResultRow r;
    r.stats.snr_db = to_real(f[0], no);
    r.stats.blocks = to_int(f[1], no);
    r.stats.bit_errors = to_int(f[2], no);
    r.stats.block_errors = to_int(f[3], no);
    r.stats.ber = to_real(f[4], no);
    r.stats.bler = to_real(f[5], no);
    r.stats.ci_low = to_real(f[6], no);
    r.stats.ci_high = to_real(f[7], no);
    r.decoder_id = f[8];
    r.seed = static_cast<std::uint64_t>(to_int(f[9], no));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string training_log_csv(std::span<const EpochRecord> log) {
  std::ostringstream os;
  os << "phase,stage,epoch,learning_rate,decoder_loss,encoder_loss,val_loss,val_ber,val_bler\n";
  for (const EpochRecord& r : log)
    os << r.phase << ',' << r.stage << ',' << r.epoch << ',' << format_real(r.learning_rate) << ','
       << format_real(r.decoder_loss) << ',' << format_real(r.encoder_loss) << ',' << format_real(r.validation.loss)
       << ',' << format_real(r.validation.ber) << ',' << format_real(r.validation.bler) << '\n';
  return os.str();
}

std::string convergence_csv(std::span<const ConvergenceRow> rows) {
  std::ostringstream os;
  os << "epoch,snr_db,ber,bler\n";
  for (const ConvergenceRow& r : rows)
    os << r.epoch << ',' << format_real(r.snr_db) << ',' << format_real(r.ber) << ',' << format_real(r.bler) << '\n';
  return os.str();
}

std::string mismatch_csv(const MismatchTable& table) {
  std::ostringstream os;
  os << "model,snr_db,ber,bler,blocks\n";
  for (std::size_t m = 0; m < table.labels.size(); ++m)
    for (const ErrorStats& s : table.cells[m])
      os << table.labels[m] << ',' << format_real(s.snr_db) << ',' << format_real(s.ber) << ','
         << format_real(s.bler) << ',' << s.blocks << '\n';
  return os.str();
}

HistogramSeries to_series(const DistanceHistogram& h, std::string label) {
  return HistogramSeries{std::move(label), h.edges, h.counts, h.mean};
}

std::string histogram_csv(std::span<const HistogramSeries> series) {
  std::ostringstream os;
  os << "label,bin_low,bin_high,count\n";
  for (const HistogramSeries& s : series)
    for (std::size_t b = 0; b < s.counts.size(); ++b)
      os << s.label << ',' << format_real(s.edges[b]) << ',' << format_real(s.edges[b + 1]) << ',' << s.counts[b]
         << '\n';
  return os.str();
}

std::vector<HistogramSeries> parse_histogram_csv(const std::string& text) {
  std::vector<HistogramSeries> out;
  std::map<std::string, std::size_t> index;
  std::size_t no = 1;
  for (const std::string& line : data_lines(text, "label,bin_low,bin_high,count")) {
    ++no;
    const auto f = split(line, ',');
    if (f.size() != 4) throw FormatError("histogram CSV line " + std::to_string(no) + " does not have 4 fields");
    auto it = index.find(f[0]);
    if (it == index.end()) {
      it = index.emplace(f[0], out.size()).first;
      out.push_back(HistogramSeries{f[0], {to_real(f[1], no)}, {}, 0.0});
    }
    HistogramSeries& s = out[it->second];
    s.edges.push_back(to_real(f[2], no));
    s.counts.push_back(to_int(f[3], no));
  }
  for (HistogramSeries& s : out) {
    double total = 0.0, weighted = 0.0;
    for (std::size_t b = 0; b < s.counts.size(); ++b) {
      total += static_cast<double>(s.counts[b]);
      weighted += static_cast<double>(s.counts[b]) * 0.5 * (s.edges[b] + s.edges[b + 1]);
    }
    s.mean = total > 0 ? weighted / total : 0.0;
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config, std::uint64_t seed,
                             const std::vector<std::string>& args,
                             const std::vector<std::filesystem::path>& outputs,
                             const std::filesystem::path& base) {
  nlohmann::json files = nlohmann::json::object();
  for (const auto& p : outputs) {
    const std::string key = base.empty() ? p.filename().string() : p.lexically_relative(base).generic_string();
    files[key] = fnv1a_hex(read_text(p));
  }
  return nlohmann::json{{"command", command},
                        {"args", args},
                        {"config", config},
                        {"config_digest", fnv1a_hex(config.dump())},
                        {"seed", seed},
                        {"version", version_string()},
                        {"outputs", files}};
}

}  // namespace dpp
