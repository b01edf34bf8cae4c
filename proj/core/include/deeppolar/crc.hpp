#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deeppolar/common.hpp"

namespace dpp {

/// CRC generator polynomial g(x) = sum_i coefficients[i] x^i of degree r.
/// Payloads enter the division register MSB-first (payload[0] is the
/// highest-degree term) and check bits are appended highest degree first,
/// so the x^0 remainder coefficient is the last bit of the word.
struct CrcSpec {
  std::string name;
  std::vector<std::uint8_t> coefficients;  // size r + 1, constant term first

  int r() const { return static_cast<int>(coefficients.size()) - 1; }

  /// Validates leading and constant coefficients; throws ConfigError.
  static CrcSpec from_coefficients(std::vector<std::uint8_t> coefficients, std::string name = "");
  /// "crc3" -> 1 + x + x^3, "crc8" -> 1 + x + x^3 + x^5 + x^8, "none" -> r = 0.
  static CrcSpec preset(std::string_view name);
};

/// Remainder of payload * x^r mod g, highest degree first (length r).
std::vector<std::uint8_t> crc_remainder(std::span<const std::uint8_t> payload, const CrcSpec& spec);

std::vector<std::uint8_t> crc_append(std::span<const std::uint8_t> payload, const CrcSpec& spec);

/// Throws DomainError when candidate.size() <= r.
bool crc_verify(std::span<const std::uint8_t> candidate, const CrcSpec& spec);

}  // namespace dpp
