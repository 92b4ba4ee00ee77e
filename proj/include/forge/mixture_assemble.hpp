#pragma once
// Final assembly: per-sample truncation to the token window, end-of-text
// termination, in-order packing into fixed windows, and corpus statistics.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/corpus_ingest.hpp"
#include "forge/tokencount.hpp"

namespace forge {

inline constexpr std::string_view kEndOfText = "<|endoftext|>";
inline constexpr std::uint64_t kDefaultWindowTokens = 2048;

struct AssemblyPolicy {
  std::uint64_t max_tokens = kDefaultWindowTokens;
  TokenCounter counter = TokenCounter::char_heuristic(kAssemblyCharsPerToken);
  std::string eot_token{kEndOfText};
  // Cut-point preference, most preferred first.
  std::string boundary_chars = "\n.;";
};

struct Truncation {
  std::string kept;                    // content + eot_token
  std::optional<std::string> overflow; // dropped remainder, if any
  bool hard_cut = false;
};

// Content is limited to max_tokens - 1 tokens; the end-of-text token takes the
// last slot. The cut lands just after the last occurrence of the most
// preferred boundary char inside the budget, or at the budget itself when
// none of them occur.
Truncation truncate_sample(std::string_view text, const AssemblyPolicy& policy = {},
                           std::optional<std::uint64_t> sample_idx = {});

// How samples are laid into windows.
//  Stream: the sample+EOS token stream is cut into consecutive full windows,
//          so a sample may continue into the next window (no padding except
//          in the final window).
//  Greedy: whole samples only; a sample that does not fit opens a new window.
//          A member's trailing EOS is elided when it ends exactly at the
//          window end.
enum class PackMode { Stream, Greedy };

std::string_view to_string(PackMode mode);

struct PackItem {
  std::uint64_t sample_idx = 0;
  std::uint64_t tokens = 0;  // content tokens, EOS excluded
};

struct PackedSequence {
  std::uint64_t window_tokens = 0;
  // Samples that start in this window, in order.
  std::vector<std::uint64_t> member_sample_idxs;
  // Stream mode: sample carried over from the previous window, with the
  // number of its tokens (content + EOS) placed here.
  std::optional<std::uint64_t> continued_sample_idx;
  std::uint64_t continued_tokens = 0;
  std::uint64_t used_tokens = 0;
  std::uint64_t elided_eos = 0;  // Greedy mode only

  double fill_fraction() const {
    return static_cast<double>(used_tokens) / static_cast<double>(window_tokens);
  }
};

struct PackResult {
  std::vector<PackedSequence> windows;
  std::uint64_t total_sample_tokens = 0;  // content tokens over all samples
  std::uint64_t total_used_tokens = 0;

  double fill_rate() const;
};

// Throws Error{OversizeSample} when a sample has more content tokens than
// the window holds.
PackResult pack(const std::vector<PackItem>& items, std::uint64_t window_tokens,
                PackMode mode = PackMode::Stream);

// Counts tokens for each sample with `counter`, then packs.
PackResult pack(const std::vector<Sample>& samples, std::uint64_t window_tokens,
                const TokenCounter& counter, PackMode mode = PackMode::Stream);

struct CorpusStats {
  std::uint64_t sample_count = 0;
  std::uint64_t total_tokens = 0;
  double mean_sample_tokens = 0.0;
  double packing_fill_rate = 0.0;
};

// Throws Error{InvalidArgument} on an empty corpus.
CorpusStats corpus_stats(const std::vector<std::uint64_t>& sample_tokens,
                         std::uint64_t window_tokens = kDefaultWindowTokens,
                         PackMode mode = PackMode::Stream);
CorpusStats corpus_stats(const std::vector<Sample>& samples, const TokenCounter& counter,
                         std::uint64_t window_tokens = kDefaultWindowTokens,
                         PackMode mode = PackMode::Stream);

// Flat text emission: member texts of each window joined by the eot literal.
std::string render_window_text(const PackedSequence& window, const std::vector<Sample>& samples,
                               std::string_view eot = kEndOfText);

}  // namespace forge
