#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dpp {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using BitMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BitVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

// Invalid shapes, inconsistent configurations, missing fields.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inputs outside an operation's mathematical domain (NaN LLRs, non-binary bits, sigma <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Divergence or other failure while optimizing.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed files: checkpoints, CSVs, manifests.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const char* version_string();

}  // namespace dpp
