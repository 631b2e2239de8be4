#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "znekit/errors.hpp"

namespace znekit {

/// Shortest round-trip decimal representation; locale-independent.
inline std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

/// Strict full-consumption double parse.
inline double parse_double_strict(std::string_view text, std::string_view what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParseError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace znekit
