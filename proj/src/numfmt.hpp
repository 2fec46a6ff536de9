#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace muspec {

/// Shortest text that reads back to the same double.
inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

/// Rounds to 12 significant digits; zero keeps its sign stripped.
inline double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.11e", v);
  return std::strtod(buf.data(), nullptr);
}

}  // namespace muspec
