#include "forge/quality_filter.hpp"

#include <algorithm>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

void CleanPolicy::validate() const {
  if (separator_min_run == 0 || repeat_min_run == 0 || repeat_reduce_to == 0 || tab_width == 0 ||
      min_nl_words == 0) {
    throw Error(ErrorKind::InvalidArgument, "clean policy counts must be positive");
  }
  if (repeat_reduce_to >= repeat_min_run) {
    throw Error(ErrorKind::InvalidArgument, "repeat_reduce_to must be smaller than repeat_min_run");
  }
  if (!(garbage_reject_threshold > 0.0 && garbage_reject_threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "garbage_reject_threshold must be in (0, 1]");
  }
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::GarbageRatio: return "GarbageRatio";
    case RejectReason::NoCodeNoProse: return "NoCodeNoProse";
    case RejectReason::TooShort: return "TooShort";
  }
  return "Unknown";
}

namespace {

bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_box_char(char32_t cp) { return cp >= 0x2500 && cp <= 0x259F; }

bool is_art_char(char32_t cp) {
  switch (cp) {
    case '-': case '=': case '*': case '_': case '|': case '+': case '#': case '~':
      return true;
    default:
      return is_box_char(cp);
  }
}

// Rebuilds `s` without the lines for which `drop(line_view)` is true.
template <class Pred>
std::string drop_lines(std::string_view s, Pred drop) {
  std::string out;
  out.reserve(s.size());
  for (const text::Line& line : text::split_lines(s)) {
    if (drop(text::view(s, line))) continue;
    out.append(s.substr(line.begin, line.next - line.begin));
  }
  return out;
}

std::string normalize(std::string_view s, std::size_t tab_width) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '\r') continue;
    if (c == '\t') {
      out.append(tab_width, ' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

bool is_separator_line(std::string_view line, const CleanPolicy& p) {
  const std::string_view body = text::trim(line);
  if (body.size() < p.separator_min_run) return false;
  const char c = body.front();
  if (p.separator_chars.find(c) == std::string::npos) return false;
  return std::all_of(body.begin(), body.end(), [c](char x) { return x == c; });
}

std::string squeeze_runs(std::string_view s, const CleanPolicy& p) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t run_begin = pos;
    const char32_t cp = text::decode(s, pos);
    std::size_t run_len = 1;
    std::size_t run_end = pos;
    while (run_end < s.size()) {
      std::size_t probe = run_end;
      if (text::decode(s, probe) != cp) break;
      run_end = probe;
      ++run_len;
    }
    if (cp != ' ' && run_len >= p.repeat_min_run) {
      for (std::size_t k = 0; k < p.repeat_reduce_to; ++k) out.append(s.substr(run_begin, pos - run_begin));
    } else {
      out.append(s.substr(run_begin, run_end - run_begin));
    }
    pos = run_end;
  }
  return out;
}

bool is_art_line(std::string_view line) {
  std::size_t visible = 0;
  std::size_t art = 0;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const char32_t cp = text::decode(line, pos);
    if (cp < 0x80 && text::is_ascii_space(static_cast<char>(cp))) continue;
    ++visible;
    art += is_art_char(cp);
  }
  return visible >= 3 && art * 5 >= visible * 4;
}

bool has_alnum(std::string_view s) { return std::any_of(s.begin(), s.end(), is_ascii_alnum); }

bool is_blank(std::string_view s) { return text::trim(s).empty(); }

std::string drop_empty_block_comments(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t copied = 0;  // s[0, copied) already emitted
  std::size_t search = 0;
  while (true) {
    const std::size_t open = s.find("/*", search);
    if (open == std::string_view::npos) break;
    const std::size_t close = s.find("*/", open + 2);
    if (close == std::string_view::npos) break;
    const std::size_t after = close + 2;
    if (has_alnum(s.substr(open + 2, close - open - 2))) {
      search = after;
      continue;
    }
    const std::size_t line_begin = s.rfind('\n', open == 0 ? 0 : open - 1);
    const std::size_t lb = (line_begin == std::string_view::npos || open == 0) ? 0 : line_begin + 1;
    std::size_t le = s.find('\n', after);
    const std::size_t line_end = le == std::string_view::npos ? s.size() : le;
    std::size_t cut_begin = open;
    std::size_t cut_end = after;
    if (lb >= copied && is_blank(s.substr(lb, open - lb)) && is_blank(s.substr(after, line_end - after))) {
      cut_begin = lb;
      cut_end = le == std::string_view::npos ? s.size() : le + 1;
    }
    out.append(s.substr(copied, cut_begin - copied));
    copied = cut_end;
    search = cut_end;
  }
  out.append(s.substr(copied));
  return out;
}

bool is_empty_line_comment(std::string_view line) {
  const std::string_view body = text::trim(line);
  return body.starts_with("//") && !has_alnum(body);
}

std::string clean_pass(std::string_view s, const CleanPolicy& p) {
  std::string t = normalize(s, p.tab_width);
  t = drop_lines(t, [&](std::string_view l) { return is_separator_line(l, p); });
  t = squeeze_runs(t, p);
  t = drop_lines(t, is_art_line);
  t = drop_empty_block_comments(t);
  t = drop_lines(t, is_empty_line_comment);
  return t;
}

}  // namespace

CleanResult clean(std::string_view text, const CleanPolicy& policy) {
  policy.validate();
  CleanResult result;
  std::string current = clean_pass(text, policy);
  while (true) {
    std::string next = clean_pass(current, policy);
    if (next == current) break;
    current = std::move(next);
  }
  const auto tabs = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\t'));
  result.report.original_chars = text::char_length(text) + tabs * (policy.tab_width - 1);
  const std::size_t cleaned_chars = text::char_length(current);
  result.report.removed_chars =
      result.report.original_chars > cleaned_chars ? result.report.original_chars - cleaned_chars : 0;
  result.report.garbage_ratio =
      result.report.original_chars == 0
          ? 0.0
          : static_cast<double>(result.report.removed_chars) /
                static_cast<double>(result.report.original_chars);
  result.text = std::move(current);
  return result;
}

bool contains_code_indicator(std::string_view text, const std::vector<std::string>& indicators) {
  for (const std::string& ind : indicators) {
    if (ind.empty()) continue;
    for (std::size_t pos = text.find(ind); pos != std::string_view::npos; pos = text.find(ind, pos + 1)) {
      const bool left_ok = pos == 0 || !text::is_ident_char(text[pos - 1]) ||
                           !text::is_ident_char(ind.front());
      const std::size_t end = pos + ind.size();
      const bool right_ok = end == text.size() || !text::is_ident_char(text[end]) ||
                            !text::is_ident_char(ind.back());
      if (left_ok && right_ok) return true;
    }
  }
  return false;
}

std::size_t count_prose_words(std::string_view text) {
  std::size_t words = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text::is_ascii_space(text[i])) ++i;
    const std::size_t b = i;
    while (i < text.size() && !text::is_ascii_space(text[i])) ++i;
    if (i == b) break;
    const std::string_view word = text.substr(b, i - b);
    bool letter = false;
    for (std::size_t pos = 0; pos < word.size() && !letter;) {
      const char32_t cp = text::decode(word, pos);
      letter = (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
               (cp >= 0xC0 && !is_box_char(cp));
    }
    words += letter;
  }
  return words;
}

AcceptDecision accept(std::string_view cleaned, std::size_t removed_chars, std::size_t original_len,
                      const CleanPolicy& policy) {
  if (original_len < text::char_length(cleaned)) {
    throw Error(ErrorKind::InvalidArgument, "original_len is shorter than the cleaned text");
  }
  if (original_len > 0 &&
      static_cast<double>(removed_chars) / static_cast<double>(original_len) >
          policy.garbage_reject_threshold) {
    return {false, RejectReason::GarbageRatio};
  }
  std::size_t visible = 0;
  for (char c : cleaned) visible += !text::is_ascii_space(c) && (static_cast<unsigned char>(c) & 0xC0u) != 0x80u;
  if (visible < policy.min_chars) return {false, RejectReason::TooShort};
  if (contains_code_indicator(cleaned, policy.code_indicators)) return {true, std::nullopt};
  if (count_prose_words(cleaned) >= policy.min_nl_words) return {true, std::nullopt};
  return {false, RejectReason::NoCodeNoProse};
}

CleanResult clean_and_judge(std::string_view text, const CleanPolicy& policy) {
  CleanResult result = clean(text, policy);
  const AcceptDecision d =
      accept(result.text, result.report.removed_chars, result.report.original_chars, policy);
  result.report.accepted = d.accepted;
  result.report.reject_reason = d.reject_reason;
  return result;
}

}  // namespace forge
