#include "deeppolar/distance.hpp"

#include <algorithm>
#include <cmath>

namespace dpp {

namespace {

double row_distance(const Matrix& x, Eigen::Index i, Eigen::Index j) {
  return (x.row(i) - x.row(j)).norm() / std::sqrt(static_cast<double>(x.cols()));
}

}  // namespace

DistanceHistogram distance_histogram(const Matrix& codewords, const DistanceConfig& config) {
  const Eigen::Index s = codewords.rows();
  if (s < 2) throw ConfigError("distance analysis needs at least two codewords");
  if (config.bins < 1 || !(config.range_max > 0.0)) throw ConfigError("distance histogram needs bins and a range");
  DistanceHistogram h;
  h.sample_count = s;
  const long long all_pairs = static_cast<long long>(s) * (s - 1) / 2;
  if (all_pairs <= config.max_pairs) {
    h.distances.reserve(static_cast<std::size_t>(all_pairs));
    for (Eigen::Index i = 0; i < s; ++i)
      for (Eigen::Index j = i + 1; j < s; ++j) h.distances.push_back(row_distance(codewords, i, j));
  } else {
    Rng rng = make_rng(config.seed, {0x70616972});
    std::uniform_int_distribution<Eigen::Index> pick(0, s - 1);
    h.distances.reserve(static_cast<std::size_t>(config.max_pairs));
    while (static_cast<long long>(h.distances.size()) < config.max_pairs) {
      const Eigen::Index i = pick(rng);
      const Eigen::Index j = pick(rng);
      if (i != j) h.distances.push_back(row_distance(codewords, i, j));
    }
  }
  h.pair_count = static_cast<long long>(h.distances.size());

  double sum = 0.0;
  for (double d : h.distances) sum += d;
  h.mean = sum / static_cast<double>(h.pair_count);
  double sq = 0.0;
  for (double d : h.distances) sq += (d - h.mean) * (d - h.mean);
  h.variance = sq / static_cast<double>(h.pair_count);

  const double width = config.range_max / config.bins;
  h.edges.resize(static_cast<std::size_t>(config.bins) + 1);
  for (int b = 0; b <= config.bins; ++b) h.edges[static_cast<std::size_t>(b)] = b * width;
  h.counts.assign(static_cast<std::size_t>(config.bins), 0);
  for (double d : h.distances) {
    const int b = std::min(config.bins - 1, static_cast<int>(d / width));
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

DistanceHistogram pairwise_distance_analysis(const EncoderTree& encoder, const DistanceConfig& config) {
  if (config.samples < 2) throw ConfigError("distance analysis needs at least two samples");
  Rng rng = make_rng(config.seed, {0x6d7367});
  const BitMatrix messages = random_bits(rng, config.samples, encoder.code().k());
  return distance_histogram(encode_tree(messages, encoder), config);
}

DistanceHistogram gaussian_reference(int n, const DistanceConfig& config) {
  if (config.samples < 2) throw ConfigError("distance analysis needs at least two samples");
  if (n < 1) throw ConfigError("gaussian reference needs a positive block length");
  Rng rng = make_rng(config.seed, {0x676175});
  return distance_histogram(gaussian_matrix(rng, config.samples, n, 1.0), config);
}

BitMatrix all_messages(int k) {
  if (k < 0 || k > 24) throw ConfigError("exhaustive enumeration supports 0 <= k <= 24");
  const Eigen::Index rows = Eigen::Index{1} << k;
  BitMatrix m(rows, k);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (int c = 0; c < k; ++c) m(r, c) = static_cast<std::uint8_t>((r >> (k - 1 - c)) & 1);
  return m;
}

std::vector<double> distance_spectrum(const Matrix& codewords, double tol) {
  std::vector<double> d;
  for (Eigen::Index i = 0; i < codewords.rows(); ++i)
    for (Eigen::Index j = i + 1; j < codewords.rows(); ++j) d.push_back(row_distance(codewords, i, j));
  std::sort(d.begin(), d.end());
  std::vector<double> out;
  for (double v : d)
    if (out.empty() || v - out.back() > tol) out.push_back(v);
  return out;
}

}  // namespace dpp
