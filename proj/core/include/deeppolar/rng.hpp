#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "deeppolar/common.hpp"

namespace dpp {

using Rng = std::mt19937_64;

/// Mixes a base seed with a path of stream coordinates (worker id, epoch,
/// batch index, ...) into an independent 64-bit seed. Pure function of its
/// inputs, so any (seed, coordinates) pair always names the same stream.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(base, path));
}

// Uniform random bits, rows x cols.
BitMatrix random_bits(Rng& rng, Eigen::Index rows, Eigen::Index cols);

// I.i.d. N(0, stddev^2) entries.
Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev);

}  // namespace dpp
