#include "forge/text.hpp"

namespace forge::text {

std::size_t byte_offset_of_char(std::string_view s, std::size_t n) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0u) != 0x80u) {
      if (seen == n) return i;
      ++seen;
    }
  }
  return s.size();
}

char32_t decode(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  int extra = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    ++pos;
    return b0;
  } else if ((b0 & 0xE0u) == 0xC0u) {
    extra = 1;
    cp = b0 & 0x1Fu;
  } else if ((b0 & 0xF0u) == 0xE0u) {
    extra = 2;
    cp = b0 & 0x0Fu;
  } else if ((b0 & 0xF8u) == 0xF0u) {
    extra = 3;
    cp = b0 & 0x07u;
  } else {
    ++pos;
    return b0;
  }
  if (pos + static_cast<std::size_t>(extra) >= s.size()) {
    ++pos;
    return b0;
  }
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(s[pos + static_cast<std::size_t>(k)]);
    if ((b & 0xC0u) != 0x80u) {
      ++pos;
      return b0;
    }
    cp = (cp << 6) | (b & 0x3Fu);
  }
  pos += static_cast<std::size_t>(extra) + 1;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    char32_t min;
    if (b0 < 0x80) {
      ++i;
      continue;
    } else if ((b0 & 0xE0u) == 0xC0u) {
      extra = 1;
      min = 0x80;
    } else if ((b0 & 0xF0u) == 0xE0u) {
      extra = 2;
      min = 0x800;
    } else if ((b0 & 0xF8u) == 0xF0u) {
      extra = 3;
      min = 0x10000;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    std::size_t pos = i;
    const char32_t cp = decode(s, pos);
    if (pos != i + extra + 1 || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i = pos;
  }
  return true;
}

std::vector<Line> split_lines(std::string_view s) {
  std::vector<Line> lines;
  const std::vector<std::size_t> newlines = simd::find_byte(s, '\n');
  lines.reserve(newlines.size() + 1);
  std::size_t begin = 0;
  for (std::size_t nl : newlines) {
    lines.push_back({begin, nl, nl + 1});
    begin = nl + 1;
  }
  if (begin < s.size()) lines.push_back({begin, s.size(), s.size()});
  return lines;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string_view trim_right(std::string_view s) {
  std::size_t e = s.size();
  while (e > 0 && is_ascii_space(s[e - 1])) --e;
  return s.substr(0, e);
}

}  // namespace forge::text
