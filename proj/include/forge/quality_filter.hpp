#pragma once
// Garbage cleaning and the accept/reject decision for corpus samples.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

struct CleanPolicy {
  std::size_t separator_min_run = 10;
  std::string separator_chars = "-=*_";
  std::size_t repeat_min_run = 10;
  std::size_t repeat_reduce_to = 3;
  std::size_t tab_width = 4;
  double garbage_reject_threshold = 0.70;
  std::size_t min_nl_words = 20;
  std::vector<std::string> code_indicators{"#include", "#define", "void",  "int",
                                           "struct",   "typedef", "if",    "for",
                                           "while",    "switch",  "return"};
  // Fewer non-whitespace characters than this after cleaning -> TooShort.
  std::size_t min_chars = 1;

  void validate() const;
};

enum class RejectReason { GarbageRatio, NoCodeNoProse, TooShort };

std::string_view to_string(RejectReason reason);

struct CleanReport {
  std::size_t original_chars = 0;  // input length, tabs counted as tab_width
  std::size_t removed_chars = 0;
  double garbage_ratio = 0.0;      // removed_chars / original_chars
  bool accepted = false;
  std::optional<RejectReason> reject_reason;
};

struct CleanResult {
  std::string text;
  CleanReport report;  // accepted/reject_reason are filled by accept()
};

// Applies, in order and repeated until nothing changes:
//   1. drop '\r'
//   2. expand each tab to tab_width spaces
//   3. drop lines that are a run (>= separator_min_run) of one separator char
//   4. squeeze any run (>= repeat_min_run) of one character other than ' '
//      down to repeat_reduce_to copies
//   5. drop ASCII-art / box-drawing lines (>= 3 non-blank chars, >= 80% of
//      them from the box/separator set)
//   6. drop empty comments: /* */ blocks and // lines with no alphanumerics
// Running to a fixed point makes clean idempotent.
CleanResult clean(std::string_view text, const CleanPolicy& policy = {});

struct AcceptDecision {
  bool accepted = false;
  std::optional<RejectReason> reject_reason;
};

// Rejects with GarbageRatio when removed/original exceeds the threshold;
// otherwise accepts text containing a code indicator as a whole token, or at
// least min_nl_words words with a letter in them.
AcceptDecision accept(std::string_view cleaned, std::size_t removed_chars, std::size_t original_len,
                      const CleanPolicy& policy = {});

// clean + accept in one step.
CleanResult clean_and_judge(std::string_view text, const CleanPolicy& policy = {});

bool contains_code_indicator(std::string_view text, const std::vector<std::string>& indicators);
std::size_t count_prose_words(std::string_view text);

}  // namespace forge
