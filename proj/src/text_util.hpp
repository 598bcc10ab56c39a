#pragma once

// Line-oriented parsing helpers shared by the file formats.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "brickdemo/core.hpp"

namespace brickdemo::detail {

struct Line {
  std::size_t number = 0;  // 1-based
  std::vector<std::string_view> tokens;
};

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

/// Non-empty lines with `#` comments stripped.
inline std::vector<Line> tokenize_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view raw = text.substr(pos, end - pos);
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto tokens = split_ws(raw);
    if (!tokens.empty()) lines.push_back({number, std::move(tokens)});
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

[[noreturn]] inline void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what)
      .with_index(line);
}

template <typename Int>
Int parse_int(std::string_view tok, std::size_t line, std::string_view what) {
  Int value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    parse_fail(line, "expected integer " + std::string(what) + ", got '" + std::string(tok) + "'");
  }
  return value;
}

inline double parse_double(std::string_view tok, std::size_t line, std::string_view what) {
  double value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    parse_fail(line, "expected number " + std::string(what) + ", got '" + std::string(tok) + "'");
  }
  return value;
}

inline Rotation parse_rotation(std::string_view tok, std::size_t line) {
  int deg = parse_int<int>(tok, line, "rotation");
  auto rot = rotation_from_degrees(deg);
  if (!rot) parse_fail(line, "invalid rotation " + std::string(tok) + " (expected 0, 90, 180 or 270)");
  return *rot;
}

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline void append_int(std::string& out, long long v) { out += std::to_string(v); }

}  // namespace brickdemo::detail
