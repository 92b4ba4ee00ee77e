#pragma once
// Small UTF-8 and line helpers shared by the corpus stages. Offsets are byte
// offsets into the original buffer; lengths called "chars" are code points.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "forge/simd/kernels.hpp"

namespace forge::text {

inline std::size_t char_length(std::string_view s) { return simd::utf8_length(s); }

// Byte offset just past the first `n` code points (clamped to s.size()).
std::size_t byte_offset_of_char(std::string_view s, std::size_t n);

// Decodes one code point at `pos`, advancing `pos`. Malformed bytes decode as
// themselves (0x80..0xFF) and advance by one.
char32_t decode(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

bool is_valid_utf8(std::string_view s);

struct Line {
  std::size_t begin;     // first byte of the line
  std::size_t end;       // one past the last content byte (excludes '\n')
  std::size_t next;      // start of the following line (end + 1, or end at EOF)
};

// Every line of `s`, including a final unterminated one. An empty string has
// no lines; a trailing '\n' does not produce an extra empty line.
std::vector<Line> split_lines(std::string_view s);

inline std::string_view view(std::string_view s, const Line& l) {
  return s.substr(l.begin, l.end - l.begin);
}

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);

inline bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

}  // namespace forge::text
