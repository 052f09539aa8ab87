#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "error.hpp"

namespace shiftlab {

// Shortest-safe round-trip form: 17 significant digits, '.' decimal point,
// independent of the locale.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCode::kData,
          "not a number: '" + std::string(s) + "'");
  return v;
}

}  // namespace shiftlab
