#include "deeppolar/crc.hpp"

#include <algorithm>

namespace dpp {

CrcSpec CrcSpec::from_coefficients(std::vector<std::uint8_t> coefficients, std::string name) {
  if (coefficients.empty()) throw ConfigError("CRC polynomial needs at least a constant term");
  for (auto c : coefficients)
    if (c > 1) throw ConfigError("CRC coefficients must be binary");
  if (coefficients.front() != 1 || coefficients.back() != 1)
    throw ConfigError("CRC polynomial must have unit constant and leading coefficients");
  return CrcSpec{std::move(name), std::move(coefficients)};
}

CrcSpec CrcSpec::preset(std::string_view name) {
  if (name == "crc3") return from_coefficients({1, 1, 0, 1}, "crc3");
  if (name == "crc8") return from_coefficients({1, 1, 0, 1, 0, 1, 0, 0, 1}, "crc8");
  if (name == "none") return from_coefficients({1}, "none");
  throw ConfigError("unknown CRC preset '" + std::string(name) + "' (expected crc3, crc8 or none)");
}

std::vector<std::uint8_t> crc_remainder(std::span<const std::uint8_t> payload, const CrcSpec& spec) {
  const auto r = static_cast<std::size_t>(spec.r());
  // reg[i] holds the coefficient of x^i.
  std::vector<std::uint8_t> reg(r, 0);
  for (std::uint8_t bit : payload) {
    if (bit > 1) throw DomainError("CRC payload must be binary");
    if (r == 0) continue;
    const std::uint8_t feedback = reg[r - 1] ^ bit;
    for (std::size_t i = r - 1; i > 0; --i) reg[i] = reg[i - 1];
    reg[0] = 0;
    if (feedback)
      for (std::size_t i = 0; i < r; ++i) reg[i] ^= spec.coefficients[i];
  }
  std::reverse(reg.begin(), reg.end());
  return reg;
}

std::vector<std::uint8_t> crc_append(std::span<const std::uint8_t> payload, const CrcSpec& spec) {
  std::vector<std::uint8_t> out(payload.begin(), payload.end());
  const auto check = crc_remainder(payload, spec);
  out.insert(out.end(), check.begin(), check.end());
  return out;
}

bool crc_verify(std::span<const std::uint8_t> candidate, const CrcSpec& spec) {
  const auto r = static_cast<std::size_t>(spec.r());
  if (candidate.size() <= r)
    throw DomainError("CRC candidate of length " + std::to_string(candidate.size()) +
                      " is not longer than r=" + std::to_string(r));
  const auto payload = candidate.first(candidate.size() - r);
  const auto expected = crc_remainder(payload, spec);
  return std::equal(expected.begin(), expected.end(), candidate.end() - static_cast<std::ptrdiff_t>(r));
}

}  // namespace dpp
