#include "deeppolar/rng.hpp"

namespace dpp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

const char* version_string() {
#ifdef DEEPPOLAR_VERSION
  return DEEPPOLAR_VERSION;
#else
  return "unknown";
#endif
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

BitMatrix random_bits(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  BitMatrix out(rows, cols);
  std::uint64_t word = 0;
  int left = 0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (left == 0) {
      word = rng();
      left = 64;
    }
    out.data()[i] = static_cast<std::uint8_t>(word & 1U);
    word >>= 1;
    --left;
  }
  return out;
}

Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = dist(rng);
  return out;
}

}  // namespace dpp
