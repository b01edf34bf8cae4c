#pragma once

#include <vector>

#include "deeppolar/model.hpp"

namespace dpp {

struct DistanceConfig {
  int samples = 10000;
  long long max_pairs = 1000000;  // above this, pairs are subsampled uniformly
  int bins = 60;
  double range_max = 3.0;  // histogram covers [0, range_max]; larger values land in the last bin
  std::uint64_t seed = 0;
};

struct DistanceHistogram {
  long long sample_count = 0;
  long long pair_count = 0;
  std::vector<double> distances;  // one per sampled pair, ||x_i - x_j|| / sqrt(n)
  std::vector<double> edges;      // bins + 1
  std::vector<long long> counts;  // bins
  double mean = 0.0;
  double variance = 0.0;
};

/// Pairwise normalized distances between the rows of codewords.
DistanceHistogram distance_histogram(const Matrix& codewords, const DistanceConfig& config);

/// Encodes config.samples random messages (per-sample power normalization
/// fitted on the sample itself) and histograms their pairwise distances.
DistanceHistogram pairwise_distance_analysis(const EncoderTree& encoder, const DistanceConfig& config);

/// Same analysis over i.i.d. N(0, 1) codebooks of length n.
DistanceHistogram gaussian_reference(int n, const DistanceConfig& config);

/// Every message of a k-bit code, one per row, in counting order.
BitMatrix all_messages(int k);

/// Sorted distinct normalized distances over all pairs of rows; values closer
/// than tol are merged.
std::vector<double> distance_spectrum(const Matrix& codewords, double tol = 1e-9);

}  // namespace dpp
