#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>

#include "flowcast/common.hpp"

namespace flowcast::util {

// Shortest round-trip decimal representation; identical across platforms that
// implement std::to_chars for doubles correctly (IEEE-754 binary64).
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericalError("double formatting failed");
  return std::string(buf, p);
}

// Fixed-precision formatting for report files where a stable column width
// matters more than round-tripping.
inline std::string format_fixed(double v, int precision) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

inline double parse_double(std::string_view s) {
  if (s.empty()) throw ParseError("empty numeric field");
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("bad numeric field: " + std::string(s));
  return v;
}

inline int64_t parse_int64(std::string_view s) {
  if (s.empty()) throw ParseError("empty integer field");
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("bad integer field: " + std::string(s));
  return v;
}

}  // namespace flowcast::util
