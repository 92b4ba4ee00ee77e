#include "forge/chunk_split.hpp"

#include <algorithm>
#include <array>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

std::string_view to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::FileMarker: return "file";
    case BoundaryKind::FunctionBoundary: return "function";
    case BoundaryKind::StatementBoundary: return "statement";
  }
  return "unknown";
}

void SplitPolicy::validate() const {
  if (min_chars == 0 || max_chars == 0) {
    throw Error(ErrorKind::InvalidArgument, "min_chars and max_chars must be positive");
  }
  if (min_chars >= max_chars) {
    throw Error(ErrorKind::InvalidArgument, "min_chars must be smaller than max_chars");
  }
  for (std::size_t i = 0; i < hierarchy.size(); ++i) {
    for (std::size_t j = i + 1; j < hierarchy.size(); ++j) {
      if (hierarchy[i] == hierarchy[j]) {
        throw Error(ErrorKind::InvalidArgument, "split hierarchy repeats a boundary kind");
      }
    }
  }
}

namespace {

constexpr std::array<std::string_view, 11> kNotDefinitions = {
    "if", "for", "while", "switch", "return", "else", "do", "case", "goto", "sizeof", "typedef"};

}  // namespace

bool looks_like_function_definition(std::string_view line) {
  const std::string_view body = text::trim_right(line);
  if (body.empty()) return false;
  const char c0 = body.front();
  if (!((c0 >= 'a' && c0 <= 'z') || (c0 >= 'A' && c0 <= 'Z') || c0 == '_')) return false;
  std::size_t ident_end = 0;
  while (ident_end < body.size() && text::is_ident_char(body[ident_end])) ++ident_end;
  const std::string_view first = body.substr(0, ident_end);
  if (std::find(kNotDefinitions.begin(), kNotDefinitions.end(), first) != kNotDefinitions.end()) {
    return false;
  }
  if (body.find(';') != std::string_view::npos) return false;
  const char last = body.back();
  if (last != ')' && last != '{') return false;
  const std::size_t paren = body.find('(');
  if (paren == std::string_view::npos || paren == 0) return false;
  std::size_t k = paren;
  while (k > 0 && body[k - 1] == ' ') --k;
  return k > 0 && text::is_ident_char(body[k - 1]);
}

std::vector<std::size_t> detect_boundaries(std::string_view text, BoundaryKind kind,
                                           std::string_view marker_prefix) {
  std::vector<std::size_t> out;
  switch (kind) {
    case BoundaryKind::FileMarker:
      for (const text::Line& line : text::split_lines(text)) {
        if (line.begin > 0 && !marker_prefix.empty() &&
            text::view(text, line).starts_with(marker_prefix)) {
          out.push_back(line.begin);
        }
      }
      break;
    case BoundaryKind::FunctionBoundary:
      for (const text::Line& line : text::split_lines(text)) {
        const std::string_view v = text::view(text, line);
        if (text::trim_right(v) == "}") out.push_back(line.next);
        if (line.begin > 0 && looks_like_function_definition(v)) out.push_back(line.begin);
      }
      break;
    case BoundaryKind::StatementBoundary:
      for (std::size_t nl : simd::find_byte(text, '\n')) {
        if (nl > 0 && (text[nl - 1] == ';' || text[nl - 1] == '\n')) out.push_back(nl + 1);
      }
      break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SplitResult split_large(std::string_view text, const SplitPolicy& policy) {
  policy.validate();
  SplitResult result;
  if (text.empty()) return result;

  std::vector<std::vector<std::size_t>> boundaries;
  boundaries.reserve(policy.hierarchy.size());
  for (BoundaryKind kind : policy.hierarchy) {
    boundaries.push_back(detect_boundaries(text, kind, policy.marker_prefix));
  }

  std::size_t start = 0;
  while (true) {
    const std::string_view rest = text.substr(start);
    const std::size_t rest_chars = text::char_length(rest);
    if (rest_chars <= policy.max_chars) {
      if (rest_chars < policy.min_chars) {
        result.dropped_chars = rest_chars;
        result.dropped_chunks = rest_chars > 0 ? 1 : 0;
      } else {
        result.chunks.emplace_back(rest);
      }
      break;
    }
    const std::size_t window_end = start + text::byte_offset_of_char(rest, policy.max_chars);
    std::size_t cut = 0;
    for (const auto& offsets : boundaries) {
      // Largest boundary inside (start, window_end]; a shorter one from the
      // same kind can only produce a shorter chunk.
      auto it = std::upper_bound(offsets.begin(), offsets.end(), window_end);
      if (it == offsets.begin()) continue;
      const std::size_t candidate = *std::prev(it);
      if (candidate <= start) continue;
      if (text::char_length(text.substr(start, candidate - start)) < policy.min_chars) continue;
      cut = candidate;
      break;
    }
    if (cut == 0) {
      cut = window_end;
      ++result.hard_splits;
    }
    result.chunks.emplace_back(text.substr(start, cut - start));
    start = cut;
  }
  return result;
}

}  // namespace forge
