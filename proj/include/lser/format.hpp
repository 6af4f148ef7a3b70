#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lser {

// Shortest round-trip decimal form of a double. Keeps CSV and config output
// byte-stable for a given value.
inline std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("parse_double: bad number '" + std::string(text) + "'");
  }
  return v;
}

inline std::int64_t parse_int(std::string_view text) {
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("parse_int: bad integer '" + std::string(text) + "'");
  }
  return v;
}

inline std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("parse_u64: bad integer '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace lser
