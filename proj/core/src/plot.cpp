#include "deeppolar/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace dpp {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;  // data ranges; y in plot units (log10 for error curves)
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kWidth - kLeft - kRight)
     << "\" height=\"" << num(kHeight - kTop - kBottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(f.px(0.5 * (f.x0 + f.x1))) << "\" y=\"" << num(kHeight - 12)
     << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  os << "<text transform=\"translate(18," << num(0.5 * (kTop + kHeight - kBottom)) << ") rotate(-90)\" "
     << "text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
}

}  // namespace

std::string render_error_curves_svg(std::span<const ResultRow> rows, const std::string& title) {
  if (rows.empty()) throw EmptyDataError("no result rows to plot");
  // Keep decoders in first-appearance order so colours are stable.
  std::vector<std::string> ids;
  std::map<std::string, std::vector<const ResultRow*>> by_id;
  double xmin = rows[0].stats.snr_db, xmax = xmin, ymin = 1.0;
  for (const ResultRow& r : rows) {
    if (!by_id.count(r.decoder_id)) ids.push_back(r.decoder_id);
    by_id[r.decoder_id].push_back(&r);
    xmin = std::min(xmin, r.stats.snr_db);
    xmax = std::max(xmax, r.stats.snr_db);
    for (double v : {r.stats.ber, r.stats.bler})
      if (v > 0) ymin = std::min(ymin, v);
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  Frame f{xmin, xmax, std::floor(std::log10(ymin)), 0.0};
  if (f.y0 >= f.y1) f.y0 = -1.0;

  std::ostringstream os;
  header(os, title);
  for (int d = static_cast<int>(f.y0); d <= 0; ++d) {
    const double y = f.py(d);
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kWidth - kRight) << "\" y2=\""
       << num(y) << "\" stroke=\"#dddddd\"/>\n"
       << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e" << d
       << "</text>\n";
  }
  const double step = (xmax - xmin) > 8 ? 2.0 : 1.0;
  for (double x = std::ceil(xmin); x <= xmax + 1e-9; x += step)
    os << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(kHeight - kBottom + 16) << "\" text-anchor=\"middle\">"
       << num(x) << "</text>\n";
  axes(os, f, "SNR (dB)", "error rate");

  for (std::size_t c = 0; c < ids.size(); ++c) {
    std::vector<const ResultRow*> pts = by_id[ids[c]];
    std::stable_sort(pts.begin(), pts.end(),
                     [](const ResultRow* a, const ResultRow* b) { return a->stats.snr_db < b->stats.snr_db; });
    const char* colour = kPalette[c % std::size(kPalette)];
    for (int which = 0; which < 2; ++which) {
      std::string path;
      for (const ResultRow* r : pts) {
        const double v = which == 0 ? r->stats.ber : r->stats.bler;
        if (!(v > 0)) continue;
        path += (path.empty() ? "M" : " L") + num(f.px(r->stats.snr_db)) + "," + num(f.py(std::log10(v)));
      }
      if (path.empty()) continue;
      os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.8\""
         << (which == 1 ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    }
    const double ly = kTop + 14 + 34.0 * static_cast<double>(c);
    const double lx = kWidth - kRight + 10;
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 24) << "\" y2=\"" << num(ly)
       << "\" stroke=\"" << colour << "\" stroke-width=\"1.8\"/>\n"
       << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(ly + 4) << "\">" << escape(ids[c]) << " BER</text>\n"
       << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly + 14) << "\" x2=\"" << num(lx + 24) << "\" y2=\""
       << num(ly + 14) << "\" stroke=\"" << colour << "\" stroke-width=\"1.8\" stroke-dasharray=\"6,4\"/>\n"
       << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(ly + 18) << "\">" << escape(ids[c]) << " BLER</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_histogram_svg(std::span<const HistogramSeries> series, const std::string& title) {
  bool any = false;
  double xmin = 0, xmax = 0, ymax = 0;
  std::vector<std::vector<double>> density(series.size());
  for (std::size_t s = 0; s < series.size(); ++s) {
    const HistogramSeries& h = series[s];
    if (h.counts.empty()) continue;
    if (h.edges.size() != h.counts.size() + 1) throw FormatError("histogram '" + h.label + "' has bad bin edges");
    double total = 0;
    for (long long c : h.counts) total += static_cast<double>(c);
    if (total <= 0) continue;
    if (!any) {
      xmin = h.edges.front();
      xmax = h.edges.back();
    }
    any = true;
    xmin = std::min(xmin, h.edges.front());
    xmax = std::max(xmax, h.edges.back());
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      const double d = static_cast<double>(h.counts[b]) / (total * (h.edges[b + 1] - h.edges[b]));
      density[s].push_back(d);
      ymax = std::max(ymax, d);
    }
  }
  if (!any) throw EmptyDataError("no histogram data to plot");
  Frame f{xmin, xmax, 0.0, ymax * 1.05};

  std::ostringstream os;
  header(os, title);
  axes(os, f, "normalized pairwise distance", "density");
  for (int t = 0; t <= 4; ++t) {
    const double x = xmin + (xmax - xmin) * t / 4.0;
    os << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(kHeight - kBottom + 16) << "\" text-anchor=\"middle\">"
       << num(x) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    if (density[s].empty()) continue;
    const HistogramSeries& h = series[s];
    const char* colour = kPalette[s % std::size(kPalette)];
    std::string path = "M" + num(f.px(h.edges[0])) + "," + num(f.py(0));
    for (std::size_t b = 0; b < density[s].size(); ++b)
      path += " L" + num(f.px(h.edges[b])) + "," + num(f.py(density[s][b])) + " L" + num(f.px(h.edges[b + 1])) +
              "," + num(f.py(density[s][b]));
    path += " L" + num(f.px(h.edges.back())) + "," + num(f.py(0));
    os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
    const double ly = kTop + 14 + 20.0 * static_cast<double>(s);
    os << "<line x1=\"" << num(kWidth - kRight + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kWidth - kRight + 34)
       << "\" y2=\"" << num(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n"
       << "<text x=\"" << num(kWidth - kRight + 40) << "\" y=\"" << num(ly + 4) << "\">" << escape(h.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void plot_results_file(const std::filesystem::path& csv, const std::filesystem::path& svg, const std::string& title) {
  const std::vector<ResultRow> rows = parse_results_csv(read_text(csv));
  write_text(svg, render_error_curves_svg(rows, title));
}

void plot_histogram_file(const std::filesystem::path& csv, const std::filesystem::path& svg,
                         const std::string& title) {
  const std::vector<HistogramSeries> series = parse_histogram_csv(read_text(csv));
  write_text(svg, render_histogram_svg(series, title));
}

}  // namespace dpp
